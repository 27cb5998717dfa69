"""Circuit IR, the scenario circuit builders, and OpenQASM 2.0 export.

Every builder is a pure function returning an immutable :class:`Circuit`.
Instructions address qubits by register index; ``Circuit.wires`` carries the
wire names so that circuits can be embedded into a larger register by name.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence, Union

from . import gates
from .errors import UnsupportedGateError, ValidationError
from .gates import ANGLES, Gate
from .statevector import ANALYSIS_WIRES, FUSION_WIRES, RECORD_WIRES, SIGNAL_WIRES, WIRES

W_METHODS = ("rotation", "unitary")


@dataclass(frozen=True)
class Gate1Q:
    qubit: int
    gate: Gate


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


@dataclass(frozen=True)
class Measure:
    qubit: int


@dataclass(frozen=True)
class PostSelect:
    """Keep only the branch where ``qubit`` reads ``bit``, then renormalize."""

    qubit: int
    bit: int = 0


Instruction = Union[Gate1Q, CNOT, Measure, PostSelect]


def instruction_qubits(ins: Instruction) -> tuple[int, ...]:
    if isinstance(ins, CNOT):
        return (ins.control, ins.target)
    return (ins.qubit,)


@dataclass(frozen=True, order=True)
class MeasurementSetting:
    """Choice ``(k1, k2, k3)`` of A_k1 B_k2 C_k3; ``k = 1`` is the Bell-basis measurement."""

    k1: int
    k2: int
    k3: int

    def __post_init__(self):
        if any(k not in (0, 1) for k in self.ks):
            raise ValidationError(f"setting entries must be 0 or 1, got {self.ks}")

    @property
    def ks(self) -> tuple[int, int, int]:
        return (self.k1, self.k2, self.k3)

    @property
    def key(self) -> str:
        return f"{self.k1}{self.k2}{self.k3}"

    @property
    def label(self) -> str:
        return f"A{self.k1}B{self.k2}C{self.k3}"

    @property
    def index(self) -> int:
        """Position in :data:`SETTINGS`."""
        return SETTINGS.index(self)

    @classmethod
    def parse(cls, text: str) -> MeasurementSetting:
        """Accepts ``A1B0C0``, ``100`` or ``1,0,0``."""
        t = text.strip().upper().replace(",", "").replace(" ", "")
        if len(t) == 6 and t[0] == "A" and t[2] == "B" and t[4] == "C":
            t = t[1] + t[3] + t[5]
        if len(t) != 3 or any(ch not in "01" for ch in t):
            raise ValidationError(f"cannot parse measurement setting {text!r}")
        return cls(int(t[0]), int(t[1]), int(t[2]))

    def __str__(self):
        return self.label


# Fixed serialization order: A0B0C0, A1B0C0, A0B1C0, A0B0C1, A1B1C0, A1B0C1, A0B1C1, A1B1C1
SETTINGS: tuple[MeasurementSetting, ...] = tuple(
    MeasurementSetting(*ks)
    for ks in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1),
               (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    wires: tuple[str, ...]
    instructions: tuple[Instruction, ...] = ()
    initial_bits: str = ""
    name: str = ""
    theta: float | None = None
    setting: MeasurementSetting | None = None
    metadata: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.wires) != self.n_qubits or len(set(self.wires)) != self.n_qubits:
            raise ValidationError("wires must name each qubit exactly once")
        if not self.initial_bits:
            object.__setattr__(self, "initial_bits", "0" * self.n_qubits)
        if len(self.initial_bits) != self.n_qubits:
            raise ValidationError("initial_bits must give one bit per qubit")
        for ins in self.instructions:
            for q in instruction_qubits(ins):
                if not 0 <= q < self.n_qubits:
                    raise ValidationError(f"{ins} references qubit outside the register")
            if isinstance(ins, CNOT) and ins.control == ins.target:
                raise ValidationError(f"{ins}: control equals target")
            if isinstance(ins, PostSelect) and ins.bit not in (0, 1):
                raise ValidationError(f"{ins}: postselected bit must be 0 or 1")

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __len__(self):
        return len(self.instructions)

    def qubit(self, wire: str) -> int:
        try:
            return self.wires.index(wire)
        except ValueError:
            raise ValidationError(f"unknown wire {wire!r}; wires are {self.wires}") from None

    def then(self, other: Circuit) -> Circuit:
        """Append ``other``'s instructions.  The initial state stays ours."""
        if other.wires != self.wires:
            other = embed(other, self.wires, keep_initial=False)
        return replace(self, instructions=self.instructions + other.instructions)

    def count_ops(self) -> Counter:
        counts: Counter = Counter()
        for ins in self.instructions:
            if isinstance(ins, Gate1Q):
                counts[ins.gate.name] += 1
            elif isinstance(ins, CNOT):
                counts["cx"] += 1
            elif isinstance(ins, Measure):
                counts["measure"] += 1
            else:
                counts["postselect"] += 1
        return counts

    def without_postselection(self) -> Circuit:
        """PostSelect instructions turned into plain measurements."""
        body = tuple(Measure(i.qubit) if isinstance(i, PostSelect) else i for i in self.instructions)
        return replace(self, instructions=body)


def embed(circuit: Circuit, wires: Sequence[str], *, keep_initial: bool = True) -> Circuit:
    """Re-target ``circuit`` onto a register whose wires are ``wires``, matching by name."""
    wires = tuple(wires)
    try:
        pos = [wires.index(w) for w in circuit.wires]
    except ValueError:
        raise ValidationError(f"wires {circuit.wires} not all present in {wires}") from None

    def move(ins: Instruction) -> Instruction:
        if isinstance(ins, CNOT):
            return CNOT(pos[ins.control], pos[ins.target])
        return replace(ins, qubit=pos[ins.qubit])

    init = ["0"] * len(wires)
    if keep_initial:
        for old, new in enumerate(pos):
            init[new] = circuit.initial_bits[old]
    return Circuit(
        n_qubits=len(wires),
        wires=wires,
        instructions=tuple(move(i) for i in circuit.instructions),
        initial_bits="".join(init),
        name=circuit.name,
        theta=circuit.theta,
        setting=circuit.setting,
        metadata=circuit.metadata,
    )


class _Builder:
    def __init__(self, wires: Sequence[str]):
        self.wires = tuple(wires)
        self.ops: list[Instruction] = []

    def _q(self, wire: str) -> int:
        try:
            return self.wires.index(wire)
        except ValueError:
            raise ValidationError(f"unknown wire {wire!r}") from None

    def gate(self, wire: str, g: Gate) -> _Builder:
        self.ops.append(Gate1Q(self._q(wire), g))
        return self

    def cx(self, control: str, target: str) -> _Builder:
        self.ops.append(CNOT(self._q(control), self._q(target)))
        return self

    def measure(self, wire: str) -> _Builder:
        self.ops.append(Measure(self._q(wire)))
        return self

    def postselect(self, wire: str, bit: int = 0) -> _Builder:
        self.ops.append(PostSelect(self._q(wire), bit))
        return self

    def build(self, initial: dict[str, int] | None = None, **kw) -> Circuit:
        bits = ["0"] * len(self.wires)
        for wire, bit in (initial or {}).items():
            bits[self._q(wire)] = str(bit)
        return Circuit(len(self.wires), self.wires, tuple(self.ops), "".join(bits), **kw)


def w_state_rotation_circuit() -> Circuit:
    """W state from |000> with three y-rotations, four CNOTs and a final X layer."""
    b = _Builder(SIGNAL_WIRES)
    b.gate("b", gates.ry(ANGLES.zeta1)).cx("b", "c")
    b.gate("c", gates.ry(ANGLES.zeta2)).cx("c", "b")
    b.gate("b", gates.ry(ANGLES.zeta3))
    b.cx("c", "a").cx("b", "a")
    for w in SIGNAL_WIRES:
        b.gate(w, gates.X)
    return b.build(name="w_rotation")


def w_state_unitary_circuit() -> Circuit:
    """W state from |100> using the U(xi) reflections."""
    u1, u2 = gates.u_xi(ANGLES.xi1), gates.u_xi(ANGLES.xi2)
    b = _Builder(SIGNAL_WIRES)
    b.gate("b", u1).gate("b", gates.H).cx("a", "b").gate("b", gates.H).gate("b", u1)
    b.cx("b", "a")
    b.gate("c", u2).gate("c", gates.H).cx("b", "c").gate("c", gates.H).gate("c", u2)
    b.cx("c", "b")
    return b.build({"a": 1}, name="w_unitary")


def w_state_circuit(method: str = "rotation") -> Circuit:
    if method == "rotation":
        return w_state_rotation_circuit()
    if method == "unitary":
        return w_state_unitary_circuit()
    raise ValidationError(f"unknown W-preparation method {method!r}; use one of {W_METHODS}")


def bell_singlet_circuit(x: str = "alpha", x_prime: str = "alpha'") -> Circuit:
    """H then CNOT on two wires initialized to |11>, giving (|01> - |10>)/sqrt(2)."""
    if x == x_prime:
        raise ValidationError("singlet wires must be distinct")
    b = _Builder((x, x_prime))
    b.gate(x, gates.H).cx(x, x_prime)
    return b.build({x: 1, x_prime: 1}, name=f"singlet_{x}")


def fusion_stage(phase_correction: bool = True) -> Circuit:
    """CNOT from each signal wire onto its fusion ancilla, then postselect the ancillas on 0.

    The CNOT-and-postselect branch equals the fusion projector
    ``|0><0|<0| - |1><1|<1|`` only up to a Z on the signal wire; with
    ``phase_correction`` that Z is applied so the surviving six-wire state
    carries the projector's relative signs exactly.
    """
    b = _Builder(WIRES)
    for sig, anc in zip(SIGNAL_WIRES, FUSION_WIRES):
        b.cx(sig, anc)
    if phase_correction:
        for sig in SIGNAL_WIRES:
            b.gate(sig, gates.Z)
    for anc in FUSION_WIRES:
        b.postselect(anc, 0)
    return b.build(name="fusion")


def setting_stage(setting: MeasurementSetting) -> Circuit:
    b = _Builder(WIRES)
    for k, sig, rec in zip(setting.ks, SIGNAL_WIRES, RECORD_WIRES):
        if k:
            b.cx(sig, rec).gate(sig, gates.H)
    for w in ANALYSIS_WIRES:
        b.measure(w)
    return b.build(name=f"setting_{setting.label}", setting=setting)


def input_state_circuit(theta: float, w_method: str = "rotation") -> Circuit:
    """Nine-wire preparation: W, U_theta on a, and the three ancilla singlets."""
    c = embed(w_state_circuit(w_method), WIRES)
    c = c.then(Circuit(len(WIRES), WIRES, (Gate1Q(0, gates.u_theta(theta)),)))
    init = list(c.initial_bits)
    for x, xp in zip(RECORD_WIRES, FUSION_WIRES):
        singlet = embed(bell_singlet_circuit(x, xp), WIRES)
        c = c.then(singlet)
        for q in (WIRES.index(x), WIRES.index(xp)):
            init[q] = "1"
    return replace(c, initial_bits="".join(init), name="input", theta=theta)


def scenario_circuit(
    theta: float,
    setting: MeasurementSetting,
    w_method: str = "rotation",
    phase_correction: bool = True,
) -> Circuit:
    """The complete nine-qubit experiment for one measurement setting."""
    c = input_state_circuit(theta, w_method)
    c = c.then(fusion_stage(phase_correction)).then(setting_stage(setting))
    meta = (("w_method", w_method), ("phase_correction", str(phase_correction).lower()))
    return replace(c, name=f"scenario_{setting.label}", theta=float(theta), setting=setting, metadata=meta)


def fusion_demo_circuit(w_method: str = "rotation") -> Circuit:
    """Single-lab fusion: W on a, b, c plus one singlet, fused on a only."""
    wires = ("a", "b", "c", "alpha", "alpha'")
    c = embed(w_state_circuit(w_method), wires)
    c = c.then(embed(bell_singlet_circuit("alpha", "alpha'"), wires))
    b = _Builder(wires)
    b.cx("a", "alpha'").postselect("alpha'", 0)
    for w in wires[:4]:
        b.measure(w)
    c = c.then(b.build())
    init = c.initial_bits[:3] + "11"
    return replace(c, initial_bits=init, name="fusion_demo")


# -- OpenQASM 2.0 export -----------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _qasm_gate(ins: Gate1Q) -> str:
    g, q = ins.gate, f"q[{ins.qubit}]"
    if g.name in ("x", "y", "z", "h", "id"):
        return f"{g.name} {q};"
    if g.name == "ry":
        return f"ry({_fmt(g.params[0])}) {q};"
    # u3(t, 0, pi) = [[cos t/2, sin t/2], [sin t/2, -cos t/2]]
    if g.name == "u_xi":
        return f"u3({_fmt(g.params[0])},0,pi) {q};"
    if g.name == "u_theta":
        return f"u3({_fmt(2 * g.params[0])},0,pi) {q};"
    raise UnsupportedGateError(f"cannot export gate {g.name!r} on qubit {ins.qubit}")


def export_qasm(circuit: Circuit) -> str:
    """Serialize to OpenQASM 2.0 text (LF line endings, trailing newline).

    Initial |1> wires are prepared with ``x`` gates in a section of their own.
    Postselection becomes a measurement preceded by a ``// postselect`` line.
    Angles are written with ``repr`` so the output is exact and byte-stable.
    """
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    if circuit.name:
        lines.append(f"// circuit: {circuit.name}")
    lines.append("// wires: " + " ".join(f"{w}=q[{i}]" for i, w in enumerate(circuit.wires)))
    if circuit.theta is not None:
        lines.append(f"// theta: {_fmt(circuit.theta)}")
    if circuit.setting is not None:
        lines.append(f"// setting: {circuit.setting.label}")
    for key, value in circuit.metadata:
        lines.append(f"// {key}: {value}")
    lines.append(f"qreg q[{circuit.n_qubits}];")
    lines.append(f"creg c[{circuit.n_qubits}];")
    ones = [i for i, bit in enumerate(circuit.initial_bits) if bit == "1"]
    if ones:
        lines.append(f"// initial state |{circuit.initial_bits}>")
        lines.extend(f"x q[{i}];" for i in ones)
        lines.append("// body")
    for ins in circuit.instructions:
        if isinstance(ins, Gate1Q):
            lines.append(_qasm_gate(ins))
        elif isinstance(ins, CNOT):
            lines.append(f"cx q[{ins.control}],q[{ins.target}];")
        elif isinstance(ins, Measure):
            lines.append(f"measure q[{ins.qubit}] -> c[{ins.qubit}];")
        elif isinstance(ins, PostSelect):
            lines.append(f"// postselect q[{ins.qubit}] == {ins.bit}")
            lines.append(f"measure q[{ins.qubit}] -> c[{ins.qubit}];")
        else:
            raise UnsupportedGateError(f"cannot export instruction {ins!r}")
    return "\n".join(lines) + "\n"

