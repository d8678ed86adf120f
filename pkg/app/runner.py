import hashlib
import json
import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from .core.errors import InconsistencyError, ParameterError, PerkhError, ResourceCapError
from .core.linalg import Field
from .diagram import AnnularDiagram, diagram_to_file, lift_diagram, quotient_diagram
from .equivariant import (
    borel_ekh,
    chain_action,
    eigen_decompose,
    localized_ranks,
    verify_fixed_generators,
    verify_smith,
)
from .homology import PoincarePolynomial, annular_complex, build_complex, homology, khovanov_complex
from .models import (
    BorelReport,
    BorelRow,
    EigenReport,
    EigenSpaceRecord,
    PoincareBlock,
    PoincareReport,
    RunReport,
)
from .moduli import verify_counting
from .periodicity import CriterionInstance, criterion_report
from .permutohedra import OrderedPartition, face, intersect_hyperplanes, vertices, verify_permutohedra

logger = logging.getLogger(__name__)

Outcome = Tuple[Any, str]

EXIT_CODES = {"pass": 0, "n/a": 0, "fail": 1, "inconclusive": 2}


def digest(payload: str, params: Dict[str, Any]) -> str:
    """sha256 of the canonical input together with the parameters"""
    text = json.dumps({"input": payload, "params": params}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def poincare_report(poly: PoincarePolynomial, F: Field) -> PoincareReport:
    return PoincareReport(
        field=F.name,
        annular=poly.annular,
        blocks=[PoincareBlock(**block) for block in poly.blocks()],
        rendering=poly.render(),
        total_dim=poly.total_dim,
    )


class Runner:
    """Runs one computation and wraps it into a RunReport"""

    def run(
        self,
        command: Sequence[str],
        payload: str,
        params: Dict[str, Any],
        task: Callable[[], Outcome],
    ) -> Tuple[RunReport, int]:
        """
        Parameters:
            command: argument vector echoed into the report
            payload: canonical input text
            params: parameters entering the digest
            task: returns (result, verdict)
        """
        started = time.perf_counter()
        logger.info({"message": "Starting command", "command": list(command)})
        try:
            result, verdict = task()
            if isinstance(result, BaseModel):
                result = result.model_dump(mode="json")
            code = EXIT_CODES[verdict]
        except ResourceCapError as e:
            result = {"error": str(e), "kind": type(e).__name__, "partial": [str(x) for x in e.partial]}
            verdict, code = "inconclusive", e.exit_code
        except PerkhError as e:
            logger.error({"message": "Command failed", "kind": type(e).__name__, "error": str(e)})
            result = {"error": str(e), "kind": type(e).__name__}
            verdict = "fail" if isinstance(e, InconsistencyError) else "n/a"
            code = e.exit_code
        elapsed = time.perf_counter() - started
        logger.info({"message": "Finished command", "verdict": verdict, "wall_time": elapsed})
        report = RunReport(
            command=list(command),
            digest=digest(payload, params),
            result=result,
            verdict=verdict,
            wall_time=elapsed,
        )
        return report, code

    def kh(self, d: AnnularDiagram, F: Field) -> Outcome:
        return poincare_report(homology(khovanov_complex(d, F)), F), "n/a"

    def akh(self, d: AnnularDiagram, F: Field) -> Outcome:
        return poincare_report(homology(annular_complex(d, F)), F), "n/a"

    def ekh(self, d: AnnularDiagram, p: int, n: int, r: int) -> Outcome:
        F = Field(r)
        cx = khovanov_complex(d, F)
        split = eigen_decompose(cx, chain_action(cx, d), p, n, r)
        spaces = []
        for s in sorted(split.dims):
            spaces.append(EigenSpaceRecord(
                s=s,
                phi=(p - 1) * p ** (s - 1) if s else 1,
                blocks=[PoincareBlock(**b) for b in split.dims[s].blocks()],
                delta=[PoincareBlock(**b) for b in split.delta[s].blocks()],
            ))
        return EigenReport(p=p, n=n, r=r, total_dim=split.total_dim, spaces=spaces), "n/a"

    def borel(self, d: AnnularDiagram, p: int, max_degree: Optional[int], annular: bool) -> Outcome:
        """Borel cohomology with the stable ranks predicted by the quotient"""
        F = Field(p)
        cx = build_complex(d, F, annular=annular)
        result = borel_ekh(cx, chain_action(cx, d), p, max_degree)
        quotient, _ = quotient_diagram(d)
        expected = localized_ranks(homology(annular_complex(quotient, F)), p, annular)
        rows = [
            BorelRow(
                q=key[0],
                k=key[1] if annular else None,
                dims=dict(sorted(result.dims[key].items())),
                stable_rank=result.stable(key),
                expected_rank=expected.get(key, 0),
            )
            for key in sorted(result.dims)
        ]
        report = BorelReport(
            p=p,
            max_degree=result.max_degree,
            annular=annular,
            rows=rows,
            stable_rank=result.stable_rank,
            stabilized=result.stabilized,
        )
        holds = result.stabilized and all(row.stable_rank == row.expected_rank for row in rows)
        return report, "pass" if holds else "fail"

    def verify(self, which: str, d: Optional[AnnularDiagram], p: Optional[int], max_index: int, max_r: int) -> Outcome:
        if which == "permutohedra":
            report = verify_permutohedra(max_r)
            return report, report.verdict
        if d is None:
            raise ParameterError(f"verify {which} needs a diagram file")
        if which == "counting":
            report = verify_counting(d, max_index)
            return report, report.verdict
        if d.symmetry is None:
            raise ParameterError(f"verify {which} needs a diagram with a symmetry")
        p = p or d.symmetry.order
        if which == "smith":
            report = verify_smith(d, p)
        else:
            report = verify_fixed_generators(d, p)
        return report, report.verdict

    def periodicity(self, inst: CriterionInstance, limit: Optional[int]) -> Outcome:
        report = criterion_report(inst, limit)
        return report, report.verdict

    def permutohedron(
        self,
        S: Sequence[int],
        partition: Optional[OrderedPartition],
        equalities: List[List[int]],
    ) -> Outcome:
        result: Dict[str, Any] = {"S": list(S), "vertices": len(vertices(S))}
        if partition is not None:
            f = face(S, partition)
            result["face"] = {
                "partition": str(partition),
                "dim": f.dim,
                "vertices": [list(v) for v in f.vertices()],
            }
        if equalities:
            inter = intersect_hyperplanes(S, equalities)
            result["intersection"] = {
                "reduced_S": list(inter.reduced_S),
                "faces": [
                    {
                        "partition": str(p),
                        "image": str(inter.image(p)),
                        "point": [str(x) for x in inter.point(p)],
                    }
                    for p in sorted(inter.surviving(), key=lambda p: (len(p), str(p)))
                    if partition is None or p == partition
                ],
            }
        return result, "n/a"

    def lift(self, d: AnnularDiagram, p: int) -> Outcome:
        lifted, _ = lift_diagram(d, p)
        return diagram_to_file(lifted).model_dump(mode="json", exclude_none=True), "n/a"

    def quotient(self, d: AnnularDiagram) -> Outcome:
        quotient, _ = quotient_diagram(d)
        return diagram_to_file(quotient).model_dump(mode="json", exclude_none=True), "n/a"


def format_pretty(report: RunReport) -> str:
    """Human-readable table of a report"""
    lines = [f"command: {' '.join(report.command)}", f"verdict: {report.verdict}", f"digest:  {report.digest}"]
    result = report.result
    for key, value in result.items():
        if isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{key}:")
            columns = list(value[0].keys())
            widths = [max(len(c), *(len(str(row.get(c, ""))) for row in value)) for c in columns]
            lines.append("  " + "  ".join(c.rjust(w) for c, w in zip(columns, widths)))
            for row in value:
                lines.append("  " + "  ".join(str(row.get(c, "")).rjust(w) for c, w in zip(columns, widths)))
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)
