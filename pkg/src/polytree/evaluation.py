"""Scoring a learned result against a ground-truth poly-tree."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from .exceptions import InputError
from .io import result_directed, result_undetermined
from .model import Polytree
from .orient import basin_edges


@dataclass
class EvalReport:
    skeleton_precision: float
    skeleton_recall: float
    skeleton_f1: float
    orientation_accuracy: float
    reversed_edges: int
    undetermined_exact: bool
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(result: dict, truth: Polytree) -> EvalReport:
    """Compare a result document with the poly-tree that generated the data.

    Orientation accuracy is the share of ground-truth basin edges recovered
    as directed with the right orientation (1.0 when there are none).
    """
    if list(result["variables"]) != list(truth.names):
        raise InputError(
            f"variable mismatch: result has {result['variables']}, truth has {list(truth.names)}"
        )
    learned = {tuple(sorted(e)) for e in map(tuple, result["skeleton"])}
    actual = truth.skeleton_edges
    hits = len(learned & actual)
    precision = hits / len(learned) if learned else 1.0
    recall = hits / len(actual) if actual else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    basin = basin_edges(truth)
    directed = result_directed(result)
    accuracy = len(basin & directed) / len(basin) if basin else 1.0
    truth_edges = set(truth.edges)
    reversed_edges = sum(1 for u, v in directed if (v, u) in truth_edges)
    non_basin = {(min(u, v), max(u, v)) for u, v in truth_edges - basin}
    return EvalReport(
        skeleton_precision=precision,
        skeleton_recall=recall,
        skeleton_f1=f1,
        orientation_accuracy=accuracy,
        reversed_edges=reversed_edges,
        undetermined_exact=result_undetermined(result) == non_basin,
        warnings=list(result.get("warnings", [])),
    )
