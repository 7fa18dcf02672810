"""One JSON-ready report gathering every check on a configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import embeddedness, horizontal, vertical
from .errors import SaddleConfigError
from .horizontal import certify_rigidity_simple, check_certificate_preconditions
from .model import Configuration, DeformationVector, classify_vertex, orientation, parallel_classes


@dataclass
class AnalysisReport:
    name: str
    graph: dict
    horizontal: dict
    vertical: dict
    embeddedness: dict
    errors: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _f(x) -> float:
    return float(round(float(x), 15))


def graph_summary(config: Configuration) -> dict:
    g = config.graph
    pc = parallel_classes(g)
    return {
        "vertices": g.n_vertices,
        "closed_edges": g.n_edges,
        "rays": g.n_rays,
        "faces": g.n_faces,
        "euler": g.euler_characteristic(),
        "euler_ok": g.euler_characteristic() == 1,
        "orientable": orientation(g) is not None,
        "vertex_classes": [classify_vertex(g, v) for v in range(g.n_vertices)],
        "parallel_edge_classes": [list(map(int, c)) for c in pc.edge_classes if len(c) > 1],
        "parallel_ray_groups": [list(map(int, c)) for c in pc.ray_groups if len(c) > 1],
    }


def horizontal_summary(config: Configuration, certify: bool = False, seed: int = 0) -> dict:
    g = config.graph
    res = horizontal.residual(g, DeformationVector.center(g))
    jac = horizontal.jacobian(config)
    space = horizontal.deformation_space(config)
    out = {
        "balance_residual": _f(np.max(np.abs(res)) if res.size else 0.0),
        "balanced": horizontal.is_balanced(g),
        "rank": jac.rank,
        "columns": jac.n_cols,
        "rows": jac.n_rows,
        "dim_D": space.dim,
        "expected_dim_D": g.n_rays - 2,
        "rigid": space.rigid,
        "rigidity_source": ["svd"],
    }
    if certify:
        problems = check_certificate_preconditions(g)
        if problems:
            out["certificate"] = {"issued": False, "reason": "; ".join(problems)}
        else:
            try:
                cert = certify_rigidity_simple(config, seed=seed)
            except SaddleConfigError as exc:
                out["certificate"] = {"issued": False, "reason": str(exc)}
            else:
                out["certificate"] = {"issued": cert.ok, **cert.to_dict()}
                if cert.ok:
                    out["rigidity_source"].append("certificate")
    return out


def vertical_summary(config: Configuration) -> dict:
    g = config.graph
    if g.n_edges == 0:
        return {"applicable": False, "reason": "no closed edges"}
    try:
        coupling = vertical.default_coupling(config)
    except SaddleConfigError as exc:
        return {"applicable": False, "reason": str(exc)}
    K = coupling.K
    rig = vertical.vertical_rigidity(config, config.phase, K)
    return {
        "applicable": True,
        "K": [_f(k) for k in K],
        "K_uses_zeta_dot": coupling.used_zeta_dot,
        "phase_trivial": vertical.is_trivial(config.phase),
        "F_ver_residual": _f(vertical.phase_residual(g, config.phase, K)),
        "phase_balanced": vertical.is_balanced_phase(config, config.phase, K),
        "rank": rig.rank,
        "columns": rig.n_cols,
        "kernel_dim": rig.kernel_dim,
        "rigid": rig.is_rigid,
    }


def analyze(config: Configuration, certify: bool = False, seed: int = 0) -> AnalysisReport:
    """Run every check; failures of individual stages become report fields."""
    errors = []
    graph = graph_summary(config)
    hor = horizontal_summary(config, certify, seed)
    ver = vertical_summary(config)
    try:
        emb = embeddedness.classify(config).to_dict()
    except SaddleConfigError as exc:
        emb = {"outcome": None, "reason": f"{type(exc).__name__}: {exc}"}
        errors.append(emb["reason"])
    return AnalysisReport(config.name, graph, hor, ver, emb, errors)
