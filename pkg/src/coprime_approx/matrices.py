from __future__ import annotations

from dataclasses import dataclass

from .precision import ExactReal, combine


@dataclass(frozen=True, order=True)
class UnimodMatrix:
    """Integer matrix ((a, b), (c, d)) with ad - bc = 1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.as_tuple()} is not 1")

    @classmethod
    def identity(cls) -> "UnimodMatrix":
        return cls(1, 0, 0, 1)

    def norm(self) -> int:
        """Sup norm: the largest absolute value of an entry."""
        return max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))

    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "UnimodMatrix":
        return UnimodMatrix(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "UnimodMatrix") -> "UnimodMatrix":
        return UnimodMatrix(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                            self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def apply(self, x: tuple[ExactReal, ExactReal]) -> tuple[ExactReal, ExactReal]:
        """Exact image of the column vector x."""
        return (combine([(self.a, x[0]), (self.b, x[1])]), combine([(self.c, x[0]), (self.d, x[1])]))

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def sort_key(self) -> tuple[int, int, int, int, int]:
        return (self.norm(), self.a, self.b, self.c, self.d)
