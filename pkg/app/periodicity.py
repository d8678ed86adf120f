"""
Periodicity obstruction from Khovanov polynomials.

If a knot is p^n-periodic (p odd) its Khovanov polynomial splits as
Khp = dP_0 + sum_{k>=1} (p^k - p^{k-1}) dP_k where:

- dP_0 is q^s (q + q^-1) plus pairs (1 + t q^{2cj}) dS_{0j} with dS_{0j} >= 0;
- every other dP_k is a sum of such pairs;
- (dP_k - dP_{k+1})(-1, q) is symmetric under q -> q^-1 modulo q^N - q^-N, N = p^{n-k};
- pairs only use j <= c w / 2, w the homological width.

The s-invariant is an input. This module searches for such splittings; when
none exists the knot is not p^n-periodic.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import Integer, isprime, symbols

from .config.settings import get_settings
from .core.errors import InconsistencyError, ParameterError, ResourceCapError
from .homology import PoincarePolynomial, forget_annular
from .models import DecompositionRecord, PeriodicityReport, PolyTerm

logger = logging.getLogger(__name__)

Monomial = Tuple[int, int]


@dataclass(frozen=True)
class LaurentPoly2:
    """Finitely supported map (t-exponent, q-exponent) -> integer"""
    terms: Mapping[Monomial, int] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", {m: c for m, c in sorted(self.terms.items()) if c})

    @classmethod
    def monomial(cls, t: int, q: int, coef: int = 1) -> "LaurentPoly2":
        return cls({(t, q): coef})

    @classmethod
    def from_terms(cls, terms: Iterable[PolyTerm]) -> "LaurentPoly2":
        out: Dict[Monomial, int] = {}
        for term in terms:
            out[(term.t, term.q)] = out.get((term.t, term.q), 0) + term.coef
        return cls(out)

    def to_terms(self) -> List[PolyTerm]:
        return [PolyTerm(t=t, q=q, coef=c) for (t, q), c in self.terms.items()]

    def __add__(self, other: "LaurentPoly2") -> "LaurentPoly2":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return LaurentPoly2(out)

    def __sub__(self, other: "LaurentPoly2") -> "LaurentPoly2":
        return self + other.scale(-1)

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPoly2) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def scale(self, k: int) -> "LaurentPoly2":
        return LaurentPoly2({m: k * c for m, c in self.terms.items()})

    def shift(self, t: int, q: int) -> "LaurentPoly2":
        return LaurentPoly2({(a + t, b + q): c for (a, b), c in self.terms.items()})

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.terms.values())

    def at_t_minus_one(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for (t, q), c in self.terms.items():
            out[q] = out.get(q, 0) + (-1) ** (t % 2) * c
        return {q: c for q, c in out.items() if c}

    def render(self) -> str:
        t, q = symbols("t q")
        expr = Integer(0)
        for (a, b), c in self.terms.items():
            expr += c * t ** a * q ** b
        return str(expr)


ZERO = LaurentPoly2()


def anchor(s: int) -> LaurentPoly2:
    """q^s (q + q^-1)"""
    return LaurentPoly2({(0, s - 1): 1, (0, s + 1): 1})


def pair(m: Monomial, j: int, c: int) -> LaurentPoly2:
    """(1 + t q^{2cj}) t^a q^b"""
    t, q = m
    return LaurentPoly2({(t, q): 1, (t + 1, q + 2 * c * j): 1})


def width_of(khp: LaurentPoly2) -> int:
    """Number of diagonals q - 2t carrying khp"""
    deltas = {q - 2 * t for (t, q), c in khp.terms.items() if c}
    if not deltas:
        return 0
    return (max(deltas) - min(deltas)) // 2 + 1


@dataclass(frozen=True)
class CriterionInstance:
    khp: LaurentPoly2
    s: int
    p: int
    n: int = 1
    c: int = 1
    width: Optional[int] = None
    blocks: Optional[Tuple[LaurentPoly2, ...]] = None

    def __post_init__(self):
        if not self.khp.is_nonnegative():
            raise ParameterError("The Khovanov polynomial has a negative coefficient")
        if not isprime(self.p) or self.p == 2:
            raise ParameterError(f"p={self.p} must be an odd prime")
        if self.n < 1:
            raise ParameterError("n must be at least 1")
        if self.c not in (1, 2):
            raise ParameterError("c is 1 over F_2 and 2 otherwise")
        if self.width is None:
            object.__setattr__(self, "width", width_of(self.khp))
        if self.width < 0:
            raise ParameterError("width must be non-negative")
        if self.blocks is not None:
            object.__setattr__(self, "blocks", tuple(self.blocks))
            if any(not b.is_nonnegative() for b in self.blocks):
                raise ParameterError("Blocks must have non-negative coefficients")
            total = ZERO
            for b in self.blocks:
                total = total + b
            if total != self.khp:
                raise ParameterError("Blocks do not sum to the Khovanov polynomial")

    @property
    def weights(self) -> Tuple[int, ...]:
        """1, then p^k - p^{k-1} for k = 1..n"""
        return (1,) + tuple(self.p ** k - self.p ** (k - 1) for k in range(1, self.n + 1))

    @property
    def max_slot(self) -> int:
        return self.c * self.width // 2


Decomposition = Tuple[LaurentPoly2, ...]


def congruence_holds(f: Mapping[int, int], N: int) -> bool:
    """f(q) == f(q^-1) modulo q^N - q^-N, i.e. in Z[q]/(q^{2N} - 1)"""
    residues: Dict[int, int] = {}
    for e, c in f.items():
        residues[e % (2 * N)] = residues.get(e % (2 * N), 0) + c
    return all(c == residues.get((-e) % (2 * N), 0) for e, c in residues.items())


def _congruences(inst: CriterionInstance, parts: Sequence[LaurentPoly2]) -> bool:
    for k in range(inst.n):
        f = (parts[k] - parts[k + 1]).at_t_minus_one()
        if not congruence_holds(f, inst.p ** (inst.n - k)):
            return False
    return True


def _pairable(poly: LaurentPoly2, c: int, max_slot: Optional[int]) -> bool:
    """Whether poly is a non-negative sum of (1 + t q^{2cj}) S_j with 1 <= j <= max_slot"""
    if not poly:
        return True
    if not poly.is_nonnegative():
        return False
    top = max(poly.terms, key=lambda m: (m[1], m[0]))
    t, q = top
    lowest = min(b for _, b in poly.terms)
    bound = (q - lowest) // (2 * c)
    if max_slot is not None:
        bound = min(bound, max_slot)
    for j in range(1, bound + 1):
        bottom = (t - 1, q - 2 * c * j)
        if poly.terms.get(bottom, 0) > 0 and _pairable(poly - pair(bottom, j, c), c, max_slot):
            return True
    return False


def _subset_sum(target: LaurentPoly2, blocks: Sequence[LaurentPoly2]) -> bool:
    if not target:
        return True
    if not target.is_nonnegative():
        return False
    for i, b in enumerate(blocks):
        if _subset_sum(target - b, blocks[i + 1:]):
            return True
    return False


@dataclass(frozen=True)
class DecompositionCheck:
    holds: bool
    violated: Tuple[str, ...]


def check_decomposition(inst: CriterionInstance, parts: Sequence[LaurentPoly2]) -> DecompositionCheck:
    """
    Evaluate every condition on a candidate splitting dP_0..dP_n

    Conditions are named "sum", "1", "2", "3", "4" and "blocks"; "4" is
    violated when a part pairs up only with slots above c w / 2.
    """
    parts = tuple(parts)
    if len(parts) != inst.n + 1:
        raise ParameterError(f"Expected {inst.n + 1} parts, got {len(parts)}")
    violated: List[str] = []
    total = ZERO
    for w, part in zip(inst.weights, parts):
        total = total + part.scale(w)
    if total != inst.khp:
        violated.append("sum")

    rests = [parts[0] - anchor(inst.s)] + list(parts[1:])
    unbounded = [_pairable(rest, inst.c, None) for rest in rests]
    if not unbounded[0]:
        violated.append("1")
    if not all(unbounded[1:]):
        violated.append("2")
    if not _congruences(inst, parts):
        violated.append("3")
    if any(ok and not _pairable(rest, inst.c, inst.max_slot) for ok, rest in zip(unbounded, rests)):
        violated.append("4")
    if inst.blocks is not None and not all(_subset_sum(part, inst.blocks) for part in parts):
        violated.append("blocks")
    return DecompositionCheck(not violated, tuple(violated))


def _canonical(parts: Decomposition) -> tuple:
    return tuple(tuple(part.terms.items()) for part in parts)


def search_decompositions(
    inst: CriterionInstance,
    limit: Optional[int] = None,
    node_cap: Optional[int] = None,
) -> List[Decomposition]:
    """
    All splittings satisfying the criterion, deduplicated and canonically ordered

    The largest remaining monomial (by q, then t) is always the top of a pair,
    so the search peels it off as part of some dP_k with some slot j; repeated
    peels of the same monomial take non-decreasing (k, j).

    Parameters:
        inst: the instance
        limit: stop after this many splittings
        node_cap: search nodes before giving up (settings.search_node_cap by default)

    Raises:
        ResourceCapError: the cap was hit; ``partial`` holds what was found
    """
    node_cap = node_cap if node_cap is not None else get_settings().search_node_cap
    remainder = inst.khp - anchor(inst.s)
    if not remainder.is_nonnegative():
        logger.info({"message": "No anchor for the s-invariant", "s": inst.s})
        return []

    weights = inst.weights
    found: Dict[tuple, Decomposition] = {}
    nodes = 0

    def finish() -> List[Decomposition]:
        return [found[key] for key in sorted(found)]

    def leaf(parts: List[Dict[Monomial, int]]) -> None:
        polys = tuple(LaurentPoly2(part) for part in parts)
        polys = (polys[0] + anchor(inst.s),) + polys[1:]
        if not _congruences(inst, polys):
            return
        if inst.blocks is not None and not all(_subset_sum(part, inst.blocks) for part in polys):
            return
        found.setdefault(_canonical(polys), polys)

    def search(rest: Dict[Monomial, int], parts: List[Dict[Monomial, int]], last: Optional[tuple]) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise ResourceCapError(f"Search stopped after {node_cap} nodes", partial=finish())
        if not rest:
            leaf(parts)
            return limit is not None and len(found) >= limit
        top = max(rest, key=lambda m: (m[1], m[0]))
        t, q = top
        floor = last[1:] if last is not None and last[0] == top else (0, 1)
        for k, w in enumerate(weights):
            if rest[top] < w:
                continue
            for j in range(1, inst.max_slot + 1):
                if (k, j) < floor:
                    continue
                bottom = (t - 1, q - 2 * inst.c * j)
                if rest.get(bottom, 0) < w:
                    continue
                following = dict(rest)
                for m in (top, bottom):
                    following[m] -= w
                    if not following[m]:
                        del following[m]
                parts[k][bottom] = parts[k].get(bottom, 0) + 1
                parts[k][top] = parts[k].get(top, 0) + 1
                done = search(following, parts, (top, k, j))
                for m in (top, bottom):
                    parts[k][m] -= 1
                    if not parts[k][m]:
                        del parts[k][m]
                if done:
                    return True
        return False

    search(dict(remainder.terms), [{} for _ in weights], None)
    result = finish()
    if limit is not None:
        result = result[:limit]
    logger.info({"message": "Decomposition search", "p": inst.p, "n": inst.n, "nodes": nodes, "found": len(result)})
    return result


def khp_from_poincare(poly: PoincarePolynomial) -> LaurentPoly2:
    """t^i q^j with coefficient dim Kh^{i,j}"""
    return LaurentPoly2({(i, q): dim for (i, q), dim in forget_annular(poly).items()})


def criterion_report(inst: CriterionInstance, limit: Optional[int] = None) -> PeriodicityReport:
    """Run the search and summarise it; a hit cap gives the verdict "inconclusive" """
    inconclusive = False
    try:
        found = search_decompositions(inst, limit=limit)
    except ResourceCapError as e:
        found, inconclusive = e.partial, True
    for parts in found:
        check = check_decomposition(inst, parts)
        if not check.holds:
            raise InconsistencyError(f"Search returned a splitting violating {check.violated}")
    if inconclusive:
        verdict = "inconclusive"
    else:
        verdict = "pass" if found else "fail"
    return PeriodicityReport(
        p=inst.p,
        n=inst.n,
        s=inst.s,
        c=inst.c,
        width=inst.width,
        decompositions=[DecompositionRecord(parts=[part.to_terms() for part in parts]) for parts in found],
        count=len(found),
        inconclusive=inconclusive,
        verdict=verdict,
    )
