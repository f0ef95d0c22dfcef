"""Chain reports: structured JSON, dominance CSV and log-log plot data."""

from __future__ import annotations

import io
import json

from .experiments import EstimateChain
from .textfmt import dumps, format_number as _num

__all__ = ["FORMATS", "dumps", "emit_report", "parse_report", "chain_csv", "chain_plotdata"]

FORMATS = ("structured", "csv", "plotdata")


def chain_csv(chain: EstimateChain) -> str:
    buf = io.StringIO()
    buf.write("radius,measured,bound,slack\n")
    for r, measured, bound, slack in chain.dominance:
        buf.write(",".join(_num(float(x)) for x in (r, measured, bound, slack)) + "\n")
    return buf.getvalue()


def chain_plotdata(chain: EstimateChain) -> str:
    """Blank-line separated two-column blocks (radius, value) for log-log axes."""
    rows = chain.dominance
    blocks = []
    for label, col in (("measured", 1), ("bound", 2)):
        lines = [f"# {chain.branch} {label} loglog"]
        lines += [f"{_num(row[0])} {_num(row[col])}" for row in rows if row[col] > 0]
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


def emit_report(chain: EstimateChain, format: str = "structured") -> str:
    if format == "structured":
        return dumps(chain.to_dict())
    if format == "csv":
        return chain_csv(chain)
    if format == "plotdata":
        return chain_plotdata(chain)
    raise ValueError(f"format must be one of {FORMATS}")


def parse_report(text: str) -> EstimateChain:
    return EstimateChain.from_dict(json.loads(text))
