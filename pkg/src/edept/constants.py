"""Physical constants. The toolkit works in natural units throughout."""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Vacuum constants; all claims made by the toolkit are unit-free exponents,
    so the defaults fix c = eps0 = mu0 = hbar = 1."""

    c: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if min(self.c, self.eps0, self.mu0, self.hbar) <= 0:
            raise ValueError("physical constants must be positive")
        if abs(self.eps0 * self.mu0 * self.c**2 - 1.0) > 1e-12:
            raise ValueError("require eps0 * mu0 * c^2 == 1")


NATURAL = PhysicalConstants()
