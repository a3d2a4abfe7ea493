"""Norm evaluations on finite quasimetric measure spaces.

Morrey-type quantities are suprema over balls; on a finite space the ball
member set is a step function of the radius, so every supremum here is a max
over the representative ball table of the space.  For the measure and
modified denominators that max equals the supremum over all real radii
exactly; for the radius-power denominator the norm is defined as the
envelope at the representative radii, which is the convention used
consistently by every inequality certified in this package.

Grand norms add a supremum over an exponent shift epsilon.  That supremum is
taken over a fixed master grid of nodes in (0, s_max); all grand quantities
in one computation share the grid, so comparisons between them are exact by
construction and stable under grid refinement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .scales import EpsilonGrid, GrandParams, MorreyVariant, grid_for
from .space import QuasimetricSpace, rep_balls

__all__ = [
    "NormError",
    "GridFunction",
    "as_matrix",
    "lebesgue_norm",
    "morrey_norm",
    "inner_seminorm_matrix",
    "grand_profile",
    "phi_functional",
    "grand_morrey_norm",
    "grand_lebesgue_norm",
    "variant_table",
    "k_phi",
    "dominance_report",
]


class NormError(ValueError):
    """Raised on invalid norm parameters or mismatched shapes."""


# ---------------------------------------------------------------------------
# function containers


@dataclass(frozen=True)
class GridFunction:
    """Named function given by one value per point of a space."""

    name: str
    values: np.ndarray

    @staticmethod
    def from_values(name: str, values, space: QuasimetricSpace) -> GridFunction:
        v = np.asarray(values, dtype=float)
        if v.shape != (space.n,):
            raise NormError(f"function needs {space.n} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NormError("function values must be finite")
        return GridFunction(name=name, values=v)

    def save(self, path, space: QuasimetricSpace) -> None:
        body = {
            "format": "grid-function",
            "version": 1,
            "name": self.name,
            "space_id": space.space_id(),
            "values": self.values.tolist(),
        }
        Path(path).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")

    @staticmethod
    def load(path, space: QuasimetricSpace) -> GridFunction:
        data = json.loads(Path(path).read_text())
        if data.get("format") != "grid-function":
            raise NormError(f"{path}: not a grid-function file")
        if data.get("space_id") not in (None, space.space_id()):
            raise NormError(
                f"{path}: function was sampled on space {data['space_id']}, "
                f"not {space.space_id()}")
        return GridFunction.from_values(data.get("name", "f"), data["values"], space)


def as_matrix(f, space: QuasimetricSpace) -> np.ndarray:
    """Coerce a function, array, scalar, or batch into an (n, m) value matrix."""
    if isinstance(f, GridFunction):
        v = f.values
    else:
        v = np.asarray(f, dtype=float)
    if v.ndim == 0:
        v = np.full(space.n, float(v))
    if v.ndim == 1:
        if v.shape[0] != space.n:
            raise NormError(f"expected {space.n} values, got {v.shape[0]}")
        return v[:, None]
    if v.ndim == 2:
        if v.shape[0] != space.n:
            raise NormError(f"expected first axis {space.n}, got {v.shape[0]}")
        return v
    raise NormError(f"cannot interpret array of ndim {v.ndim} as functions")


def _squeeze(values: np.ndarray, f) -> float | np.ndarray:
    batched = (isinstance(f, np.ndarray) and f.ndim == 2)
    return values if batched else float(values[0])


# ---------------------------------------------------------------------------
# plain norms


def lebesgue_norm(f, space: QuasimetricSpace, p: float):
    """(integral |f|^p dmu)^(1/p) for p >= 1."""
    if p < 1:
        raise NormError(f"Lebesgue norm needs p >= 1, got {p:g}")
    F = as_matrix(f, space)
    vals = (np.abs(F) ** p * space.weights[:, None]).sum(axis=0) ** (1.0 / p)
    return _squeeze(vals, f)


def variant_table(space: QuasimetricSpace, variant: MorreyVariant):
    """Representative ball table and denominator array for a norm variant."""
    cap = variant.resolved_cap()
    dil = variant.dilation if variant.kind == "modified" else 1.0
    table = rep_balls(space, dilation=dil, radius_cap=cap, dedupe=True)
    key = ("variant_den", variant.kind, variant.gamma, dil, cap)
    den = space._cache.get(key)
    if den is None:
        if variant.kind == "measure":
            den = table.measures
        elif variant.kind == "radius":
            den = table.radii ** variant.gamma
        else:
            den = table.dilated_measures
        space._cache[key] = den
    return table, den


def inner_seminorm_matrix(F: np.ndarray, space: QuasimetricSpace, p_eff: float,
                          lam_eff: float, variant: MorreyVariant) -> np.ndarray:
    """max over balls of [den^(-lam) integral_B |f|^p]^(1/p), per column of F."""
    if p_eff < 1:
        raise NormError(f"shifted exponent fell below 1: {p_eff:g}")
    table, den = variant_table(space, variant)
    if table.size == 0:
        return np.zeros(F.shape[1])
    pw = np.abs(F) ** p_eff * space.weights[:, None]
    integrals = table.masks_f @ pw
    scaled = den[:, None] ** (-lam_eff) * integrals
    return scaled.max(axis=0) ** (1.0 / p_eff)


def morrey_norm(f, space: QuasimetricSpace, p: float, lam: float,
                variant: MorreyVariant | None = None):
    """sup over representative balls of [den^(-lam) integral_B |f|^p]^(1/p)."""
    if p < 1:
        raise NormError(f"Morrey norm needs p >= 1, got {p:g}")
    if not 0 <= lam < 1:
        raise NormError(f"Morrey norm needs 0 <= lam < 1, got {lam:g}")
    if variant is None:
        variant = MorreyVariant()
    F = as_matrix(f, space)
    return _squeeze(inner_seminorm_matrix(F, space, p, lam, variant), f)


# ---------------------------------------------------------------------------
# grand norms


def grand_profile(F: np.ndarray, space: QuasimetricSpace, params: GrandParams,
                  nodes: np.ndarray) -> np.ndarray:
    """Weighted inner values phi(eps)^(1/(p-eps)) N(eps; f) per node and column."""
    out = np.empty((len(nodes), F.shape[1]))
    for i, eps in enumerate(nodes):
        pe = params.p - float(eps)
        le = params.lam - float(params.A(float(eps)))
        w = float(params.phi(float(eps))) ** (1.0 / pe)
        out[i] = w * inner_seminorm_matrix(F, space, pe, le, params.variant)
    return out


def phi_functional(f, space: QuasimetricSpace, params: GrandParams, s: float,
                   include_endpoint: bool = False):
    """Grand supremum truncated to master-grid nodes below s.

    With include_endpoint the node equal to s (inserted if absent) joins the
    max, which evaluates the closed-range variant at s.  Monotone in s by
    construction since larger s only admits more nodes.
    """
    if not 0 < s <= params.s_max * (1.0 + 1e-12):
        raise NormError(f"truncation point must lie in (0, s_max], got {s:g}")
    F = as_matrix(f, space)
    nodes = grid_for(params).nodes
    sel = nodes[nodes < s]
    if include_endpoint:
        sel = np.unique(np.append(sel, s))
    if sel.size == 0:
        sel = np.asarray([s]) if include_endpoint else sel
    if sel.size == 0:
        raise NormError(f"no grid node below s={s:g}; refine the grid")
    vals = grand_profile(F, space, params, sel).max(axis=0)
    return _squeeze(vals, f)


def grand_morrey_norm(f, space: QuasimetricSpace, params: GrandParams,
                      grid: EpsilonGrid | None = None):
    """Grand Morrey norm: sup over the shift grid of weighted inner seminorms."""
    F = as_matrix(f, space)
    if grid is None:
        grid = grid_for(params)
    vals = grand_profile(F, space, params, grid.nodes).max(axis=0)
    return _squeeze(vals, f)


def grand_lebesgue_norm(f, space: QuasimetricSpace, p: float, theta: float = 1.0):
    """sup over eps in (0, p-1] of [eps^theta integral |f|^(p-eps)]^(1/(p-eps))."""
    if p <= 1:
        raise NormError(f"grand Lebesgue norm needs p > 1, got {p:g}")
    from .scales import build_epsilon_grid

    F = as_matrix(f, space)
    nodes = build_epsilon_grid(p - 1.0, closed=True).nodes
    best = np.zeros(F.shape[1])
    w = space.weights[:, None]
    for eps in nodes:
        pe = p - float(eps)
        vals = (float(eps) ** theta * (np.abs(F) ** pe * w).sum(axis=0)) ** (1.0 / pe)
        best = np.maximum(best, vals)
    return _squeeze(best, f)


# ---------------------------------------------------------------------------
# dominance machinery


def k_phi(params: GrandParams) -> float:
    """max over the master grid of phi(eps)^(1/(p-eps))."""
    nodes = grid_for(params).nodes
    return float(np.max(params.phi(nodes) ** (1.0 / (params.p - nodes))))


def dominance_report(space: QuasimetricSpace, params: GrandParams, sigma: float) -> dict:
    """Exact Hoelder factors dominating the grand tail above sigma.

    For every representative ball B and node eps >= sigma the inner seminorm
    at eps is bounded by factor_B(eps, sigma) times the inner seminorm at
    sigma, with

        factor_B = den^((lam - A(sigma))/(p - sigma) - (lam - A(eps))/(p - eps))
                   * (mu B)^(1/(p - eps) - 1/(p - sigma)).

    M_delta is the max of these factors; the dominance constant
    C = max(K_phi M_delta, phi(sigma)^(1/(p - sigma))) then gives

        Phi(f, s_max) <= C phi(sigma)^(-1/(p - sigma)) Phi_closed(f, sigma)

    for every f, which is checked (never assumed) by the certification layer.
    """
    if not 0 < sigma < params.s_max:
        raise NormError(f"sigma must lie in (0, s_max), got {sigma:g}")
    table, den = variant_table(space, params.variant)
    nodes = grid_for(params).nodes
    above = nodes[nodes >= sigma]
    if above.size == 0:
        above = np.asarray([sigma])
    log_den = np.log(den)
    log_mu = np.log(table.measures)
    inv_sig = 1.0 / (params.p - sigma)
    lam_sig = params.lam - float(params.A(sigma))
    m_delta = -np.inf
    witness = {}
    for eps in above:
        pe = params.p - float(eps)
        lam_eps = params.lam - float(params.A(float(eps)))
        log_factor = (lam_sig * inv_sig - lam_eps / pe) * log_den \
            + (1.0 / pe - inv_sig) * log_mu
        k = int(np.argmax(log_factor))
        if log_factor[k] > m_delta:
            m_delta = float(log_factor[k])
            witness = {
                "eps": float(eps),
                "center": int(table.centers[k]),
                "radius": float(table.radii[k]),
            }
    m_delta = float(np.exp(m_delta))
    kphi = k_phi(params)
    w_sigma = float(params.phi(sigma)) ** inv_sig
    C = max(kphi * m_delta, w_sigma)
    gamma = params.variant.gamma
    shape_base = max(1.0, space.diameter ** gamma)
    return {
        "sigma": float(sigma),
        "M_delta": m_delta,
        "K_phi": kphi,
        "w_sigma": w_sigma,
        "C": C,
        "C0": C / shape_base,
        "shape": f"C0 * max(1, d_X^{gamma:g})",
        "witness": witness,
    }
