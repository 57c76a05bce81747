"""Exception hierarchy shared by all k3hecke modules."""


class K3HeckeError(Exception):
    """Base class for every error raised by this package."""


# Gaussian integers
class DivisibleByRamified(K3HeckeError, ValueError):
    pass


class NotPrime(K3HeckeError, ValueError):
    pass


class ModulusTooLarge(K3HeckeError, ValueError):
    pass


# Finite fields
class EvenCharacteristic(K3HeckeError, ValueError):
    pass


class TableTooLarge(K3HeckeError, ValueError):
    pass


class NoQuarticCharacter(K3HeckeError, ValueError):
    pass


class FieldMismatch(K3HeckeError, ValueError):
    pass


class TrivialCharacter(K3HeckeError, ValueError):
    pass


# Counting
class BadPrime(K3HeckeError, ValueError):
    pass


class BoundExceeded(K3HeckeError, ValueError):
    pass


class InternalInconsistency(K3HeckeError, RuntimeError):
    """A computed quantity violated an identity it must satisfy; indicates a bug."""


class CountMismatch(K3HeckeError):
    """Two independent counting methods disagree on the same (spec, p, m)."""

    def __init__(self, message, p=None, m=None):
        super().__init__(message)
        self.p = p
        self.m = m


class CacheConflict(K3HeckeError):
    pass


# Frobenius extraction
class RamifiedPrime(K3HeckeError, ValueError):
    pass


class InconsistentCounts(K3HeckeError):
    def __init__(self, message, p=None):
        super().__init__(message)
        self.p = p


class NoGaussianSolution(K3HeckeError, ValueError):
    pass


class MissingData(K3HeckeError):
    pass


# Hecke characters
class NotCoprime(K3HeckeError, ValueError):
    pass


class NoCharacterWithinBound(K3HeckeError):
    pass


class ConflictingObservations(K3HeckeError):
    """Observations cannot come from one character; ``primes`` names the culprits."""

    def __init__(self, message, residue_class=None, primes=()):
        super().__init__(message)
        self.residue_class = residue_class
        self.primes = tuple(primes)


class InsufficientData(K3HeckeError):
    """Too few unambiguous observations to attempt a fit."""


# configuration
class ConfigError(K3HeckeError, ValueError):
    pass
