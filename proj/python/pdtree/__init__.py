"""Persistence diagram distances on randomly shifted quadtrees."""

from pkgutil import extend_path

# A build tree may hold the compiled module in a second pdtree directory.
__path__ = extend_path(__path__, __name__)

import json

from ._pdtree import (
    Diagram,
    OracleCapExceeded,
    ParseError,
    Quadtree,
    SignatureMismatchError,
    distance_table,
    gen_gaussian,
    gen_uniform,
    wasserstein,
)
from ._pdtree import distance_report as _distance_report

__all__ = [
    "Diagram",
    "OracleCapExceeded",
    "ParseError",
    "Quadtree",
    "SignatureMismatchError",
    "distance",
    "distance_table",
    "gen_gaussian",
    "gen_uniform",
    "wasserstein",
]


def distance(p, q, method="flowtree", metric="l2", seeds=(0,), reduce="mean"):
    """Distance report as a dict with keys method, metric, value, reduce,
    seeds, tree_meta and elapsed."""
    if not isinstance(p, Diagram):
        p = Diagram(p)
    if not isinstance(q, Diagram):
        q = Diagram(q)
    return json.loads(_distance_report(p, q, method, metric, list(seeds), reduce))
