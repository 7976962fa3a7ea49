"""Constructive ten-basis decomposition of three signal spaces.

Bases are built by successive Steinitz complements; a final repair step
rewrites the three "yellow" bases so that B1 + B2 = B3 holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .instance import SubspaceFamily
from .linalg import MatrixFq, contains, hstack, rank, solve_matrix, steinitz_complement

BASIS_NAMES = ("B123", "B12", "B13", "B23", "B1(2,3)", "B2(1,3)", "B3(1,2)", "B1c", "B2c", "B3c")


class DecompositionError(AssertionError):
    """A property the construction guarantees did not hold: an implementation bug."""


@dataclass(frozen=True)
class DecompositionBases:
    B123: MatrixFq
    B12: MatrixFq
    B13: MatrixFq
    B23: MatrixFq
    B1: MatrixFq  # B_{1(2,3)}^{(12,13)^c}
    B2: MatrixFq  # B_{2(1,3)}^{(12,23)^c}
    B3: MatrixFq  # B_{3(1,2)}^{(13,23)^c}
    B1c: MatrixFq
    B2c: MatrixFq
    B3c: MatrixFq
    family: SubspaceFamily = dc_field(compare=False, repr=False)
    R: tuple[MatrixFq, ...] | None = dc_field(default=None, compare=False, repr=False)

    def by_name(self) -> dict[str, MatrixFq]:
        return dict(
            zip(
                BASIS_NAMES,
                (self.B123, self.B12, self.B13, self.B23, self.B1, self.B2, self.B3, self.B1c, self.B2c, self.B3c),
            )
        )

    @property
    def sizes(self) -> dict[str, int]:
        return {k: v.cols for k, v in self.by_name().items()}

    def pair(self, i: int, j: int) -> MatrixFq:
        return {(0, 1): self.B12, (0, 2): self.B13, (1, 2): self.B23}[(min(i, j), max(i, j))]

    def yellow(self, i: int) -> MatrixFq:
        return (self.B1, self.B2, self.B3)[i]

    def to_json(self) -> dict:
        return {name: [list(c) for c in M.columns()] for name, M in self.by_name().items()}


def decompose(family: SubspaceFamily) -> DecompositionBases:
    U1, U2, U3 = family.U
    B123 = family.U123
    B12 = steinitz_complement(family.U_pair(0, 1), B123)
    B13 = steinitz_complement(family.U_pair(0, 2), B123)
    B23 = steinitz_complement(family.U_pair(1, 2), B123)
    B1 = steinitz_complement(family.cross[0], hstack(B123, B12, B13))
    B2 = steinitz_complement(family.cross[1], hstack(B123, B12, B23))
    B3 = steinitz_complement(family.cross[2], hstack(B123, B13, B23))
    B1c = steinitz_complement(U1, hstack(B123, B12, B13, B1))
    B2c = steinitz_complement(U2, hstack(B123, B12, B23, B2))
    B3c = steinitz_complement(U3, hstack(B123, B13, B23, B3))
    if not B1.cols == B2.cols == B3.cols:
        raise DecompositionError(f"yellow sizes differ: {B1.cols}, {B2.cols}, {B3.cols}")

    R = None
    if B1.cols:
        blocks = (B123, B12, B13, B23, B1, B1c, B2, B2c)
        coeff = solve_matrix(hstack(*blocks), B3)
        if coeff is None:
            raise DecompositionError("B3(1,2) is not in the span of [U1, U2]")
        R, start = [], 0
        for b in blocks:
            R.append(_rows(coeff, start, b.cols))
            start += b.cols
        R1, R2, R3, R4, R5, R6, R7, R8 = R
        if not (R6.is_zero() and R8.is_zero()):
            raise DecompositionError("R6 and R8 must vanish")
        if rank(R5) != R5.cols or rank(R7) != R7.cols:
            raise DecompositionError("R5 and R7 must have full column rank")
        B3 = B3 - B123 @ R1 - B13 @ R3 - B23 @ R4
        B2 = B2 @ R7 + B12 @ R2
        B1 = B1 @ R5
        R = tuple(R)
    return DecompositionBases(B123, B12, B13, B23, B1, B2, B3, B1c, B2c, B3c, family, R)


def _rows(M: MatrixFq, start: int, count: int) -> MatrixFq:
    return MatrixFq(M.field, count, M.cols, M.data[start : start + count])


# --- verification -------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyReport:
    results: tuple[bool, ...]  # P1..P20
    diagnostics: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return all(self.results)

    def failed(self) -> list[int]:
        return [i + 1 for i, r in enumerate(self.results) if not r]


def _is_basis_of(M: MatrixFq, space: MatrixFq) -> tuple[bool, str]:
    if rank(M) != M.cols:
        return False, f"rank {rank(M)} < {M.cols} columns"
    if not (contains(space, M) and contains(M, space)):
        return False, "span differs from target space"
    return True, ""


def property_targets(b: DecompositionBases):
    """The 19 (blocks, target space) pairs in property order."""
    f = b.family
    U1, U2, U3 = f.U
    B123, B12, B13, B23, B1, B2, B3, B1c, B2c, B3c = (
        b.B123, b.B12, b.B13, b.B23, b.B1, b.B2, b.B3, b.B1c, b.B2c, b.B3c,
    )
    U12, U13, U23 = f.U_pair(0, 1), f.U_pair(0, 2), f.U_pair(1, 2)
    all3 = hstack(U1, U2, U3)
    return [
        ((B123,), f.U123),
        ((B123, B12), U12),
        ((B123, B13), U13),
        ((B123, B23), U23),
        ((B123, B12, B13), hstack(U12, U13)),
        ((B123, B12, B23), hstack(U12, U23)),
        ((B123, B13, B23), hstack(U13, U23)),
        ((B123, B12, B13, B1), f.cross[0]),
        ((B123, B12, B23, B2), f.cross[1]),
        ((B123, B13, B23, B3), f.cross[2]),
        ((B123, B12, B13, B1, B1c), U1),
        ((B123, B12, B23, B2, B2c), U2),
        ((B123, B13, B23, B3, B3c), U3),
        ((B123, B12, B13, B23, B1, B2, B1c, B2c), hstack(U1, U2)),
        ((B123, B12, B13, B23, B1, B3, B1c, B3c), hstack(U1, U3)),
        ((B123, B12, B13, B23, B2, B3, B2c, B3c), hstack(U2, U3)),
        ((B123, B12, B23, B13, B1, B2, B1c, B2c, B3c), all3),
        ((B123, B12, B23, B13, B1, B3, B1c, B2c, B3c), all3),
        ((B123, B12, B23, B13, B2, B3, B1c, B2c, B3c), all3),
    ]


def verify_properties(b: DecompositionBases) -> PropertyReport:
    results, diags = [], []
    for i, (blocks, space) in enumerate(property_targets(b), 1):
        ok, why = _is_basis_of(hstack(*blocks), space)
        results.append(ok)
        diags.append(f"P{i}: {why}" if not ok else f"P{i}: ok")
    p20 = b.B1.cols == b.B2.cols == b.B3.cols and (b.B1 + b.B2) == b.B3
    results.append(p20)
    diags.append("P20: ok" if p20 else "P20: B1(2,3) + B2(1,3) != B3(1,2)")
    return PropertyReport(tuple(results), tuple(diags))


def accounting_holds(b: DecompositionBases) -> bool:
    """Column counts against the ranks of each U_k and of [U1, U2, U3]."""
    s = b.sizes
    f = b.family
    ok = s["B123"] + s["B12"] + s["B13"] + s["B1(2,3)"] + s["B1c"] == rank(f.U[0])
    ok &= s["B123"] + s["B12"] + s["B23"] + s["B2(1,3)"] + s["B2c"] == rank(f.U[1])
    ok &= s["B123"] + s["B13"] + s["B23"] + s["B3(1,2)"] + s["B3c"] == rank(f.U[2])
    nine = sum(s[n] for n in BASIS_NAMES if n != "B3(1,2)")
    ok &= nine == rank(hstack(*f.U))
    ok &= s["B1(2,3)"] == s["B2(1,3)"] == s["B3(1,2)"]
    return bool(ok)
