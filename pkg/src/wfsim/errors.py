"""Exception hierarchy shared by all wfsim modules."""


class WfsimError(Exception):
    """Base class for every error raised by wfsim."""


class ValidationError(WfsimError, ValueError):
    pass


class CapacityError(WfsimError, ValueError):
    """Requested register is larger than the dense simulator supports."""


class QubitIndexError(WfsimError, IndexError):
    pass


class UnsupportedGateError(WfsimError, ValueError):
    pass


class PostselectionError(WfsimError, ValueError):
    """Postselection condition has zero probability on the current state."""


class EmptyDataError(WfsimError, ValueError):
    pass


class IncompleteDataError(WfsimError, ValueError):
    pass
