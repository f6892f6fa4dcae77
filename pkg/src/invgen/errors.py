"""Exception types raised across the package."""


class InvgenError(Exception):
    """Base class for computation errors surfaced by the CLI with exit code 1."""


class CapExceeded(InvgenError):
    pass


class DegreeMismatch(InvgenError):
    pass


class SchemaError(InvgenError):
    def __init__(self, path: str, message: str = "missing or invalid field"):
        super().__init__(f"{path}: {message}")
        self.path = path


class NotSimple(InvgenError):
    pass


class NotAnAutomorphism(InvgenError):
    def __init__(self, index: int, message: str = "images do not define an automorphism"):
        super().__init__(f"aut_generators[{index}]: {message}")
        self.index = index


class OrderMismatch(InvgenError):
    pass


class AutTooLarge(InvgenError):
    """|Aut(T)| > |T|^2 for a supplied entry."""


class UnknownGroup(InvgenError):
    pass


class LatticeUnavailable(InvgenError):
    pass


class OutOfRange(InvgenError):
    pass
