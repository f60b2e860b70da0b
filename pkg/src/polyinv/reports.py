"""Certificate report serialization.

Reports are JSON objects {"type", "inputs", "result", "per_vertex"} with
every real emitted at 17 significant digits (lossless for doubles).
Infinite bounds serialize as the JSON extension literal `Infinity`, which
`json.loads` accepts back.
"""

import json
import math

import numpy as np

from .certify import ContractionCertificate, ScenarioCertificate

__all__ = [
    "certificate_report",
    "dumps_17g",
    "load_report",
    "save_report",
]


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, np.ndarray):
        v = v.tolist()
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_value(item) for item in v) + "]"
    if isinstance(v, dict):
        items = (f"{json.dumps(str(k))}: {_format_value(val)}" for k, val in v.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_17g(obj) -> str:
    """JSON text with all reals at 17 significant digits."""
    return _format_value(obj)


def certificate_report(cert) -> dict:
    if isinstance(cert, ContractionCertificate):
        per_vertex = []
        if cert.per_vertex is not None:
            per_vertex = [
                {"vertex": vc.vertex.tolist(), "d_min": vc.d_min, "gamma": vc.gamma}
                for vc in cert.per_vertex
            ]
        return {
            "type": "contraction",
            "inputs": {
                "epsilon": cert.epsilon,
                "N": cert.sample_count,
                "M": cert.mode_count,
            },
            "result": {
                "status": cert.status,
                "delta": cert.delta,
                "theta": cert.theta,
                "confidence_bound": cert.confidence_bound,
                "effective_violation": cert.effective_violation,
                "gamma_lower": cert.gamma_lower,
                "lambda": cert.contraction_rate,
                "reason": cert.reason,
            },
            "per_vertex": per_vertex,
        }
    if isinstance(cert, ScenarioCertificate):
        return {
            "type": "scenario",
            "inputs": {
                "beta": cert.beta,
                "N": cert.sample_count,
                "M": cert.mode_count,
            },
            "result": {
                "support_count": cert.support_count,
                "support_indices": list(cert.support_indices),
                "epsilon_of_s": cert.epsilon_of_s,
                "almost_invariance_level": cert.almost_invariance_level,
                "vacuous": cert.vacuous,
            },
            "per_vertex": [],
        }
    raise TypeError(f"not a certificate: {type(cert).__name__}")


def save_report(cert_or_dict, path, extra_inputs: dict | None = None) -> None:
    report = (
        cert_or_dict
        if isinstance(cert_or_dict, dict)
        else certificate_report(cert_or_dict)
    )
    if extra_inputs:
        report = dict(report)
        report["inputs"] = {**report["inputs"], **extra_inputs}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_17g(report))
        fh.write("\n")


def load_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
