"""Scenario config parsing (TOML) with fail-fast validation.

Unknown keys are errors; every diagnostic carries the dotted key path.  The
parsed Config builds the Moebius word, the surface patch and the scenario
consumed by the CLI commands.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .geometry import Frame, Hyperplane, Sphere
from .mobius import MobiusMap, Reflection, make_phi_a, make_sigma_a
from .monotonicity import MobiusScenario, ReflectionScenario
from .quadrature import DEFAULT_MAX_DEPTH, DEFAULT_TOL
from .surfaces import (
    ParametricPatch,
    catenoid,
    complex_parabola,
    enneper,
    flat_disk,
    helicoid,
)

_CHECK_NAMES = (
    "volume_identity",
    "weighted_identity",
    "flux",
    "coarea",
    "gradient",
    "divW",
    "prescribed_point",
)


@dataclass(frozen=True)
class Config:
    n: int
    word: list
    surface_kind: str
    patch: ParametricPatch
    radii: np.ndarray
    r_max: float
    tol: float
    max_depth: int
    checks: dict
    prescribed_point: Optional[np.ndarray]
    raw: dict = field(repr=False, default_factory=dict)

    def build_map(self) -> MobiusMap:
        return MobiusMap(self.word)

    def build_scenario(self, validate: bool = True):
        """ReflectionScenario for a single sphere reflection, else general."""
        if len(self.word) == 1 and isinstance(self.word[0].surface, Sphere):
            sph = self.word[0].surface
            return ReflectionScenario(sph.center, sph.radius, self.patch,
                                      self.r_max, validate=validate)
        return MobiusScenario(self.build_map(), self.patch, self.r_max,
                              validate=validate)


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"missing required key '{path}.{key}'")
    return table[key]


def _no_unknown(table: dict, allowed, path: str):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}.{key}'")


def _vec(value, n: int, path: str) -> np.ndarray:
    try:
        v = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{path}' is not a numeric vector: {exc}") from None
    if v.shape != (n,):
        raise ConfigError(f"'{path}' must have length {n}, got shape {v.shape}")
    return v


def _float(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{path}' must be a number")
    out = float(value)
    if positive and not out > 0:
        raise ConfigError(f"'{path}' must be positive")
    return out


def _parse_word(entries, n: int) -> list:
    if not isinstance(entries, list) or not entries:
        raise ConfigError("'mobius.word' must be a non-empty array of tables")
    word = []
    for i, entry in enumerate(entries):
        path = f"mobius.word[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"'{path}' must be a table")
        kind = _require(entry, "type", path)
        if kind == "sphere":
            _no_unknown(entry, {"type", "center", "radius"}, path)
            center = _vec(_require(entry, "center", path), n, f"{path}.center")
            radius = _float(_require(entry, "radius", path), f"{path}.radius", positive=True)
            word.append(Reflection(Sphere(center, radius)))
        elif kind == "plane":
            _no_unknown(entry, {"type", "normal", "offset"}, path)
            normal = _vec(_require(entry, "normal", path), n, f"{path}.normal")
            norm = float(np.linalg.norm(normal))
            if norm == 0.0:
                raise ConfigError(f"'{path}.normal' must be nonzero")
            offset = _float(_require(entry, "offset", path), f"{path}.offset")
            word.append(Reflection(Hyperplane(normal / norm, offset / norm)))
        elif kind in ("named_sigma_a", "named_phi_a"):
            _no_unknown(entry, {"type", "a"}, path)
            a = _vec(_require(entry, "a", path), n, f"{path}.a")
            maker = make_sigma_a if kind == "named_sigma_a" else make_phi_a
            word.extend(maker(a).word)
        else:
            raise ConfigError(f"'{path}.type' must be sphere|plane|named_sigma_a|named_phi_a")
    return word


def _parse_surface(table: dict, n: int) -> tuple:
    path = "surface"
    _no_unknown(table, {"kind", "params", "domain"}, path)
    kind = _require(table, "kind", path)
    params = table.get("params", {})
    domain = table.get("domain", {})
    if not isinstance(params, dict) or not isinstance(domain, dict):
        raise ConfigError("'surface.params' and 'surface.domain' must be tables")

    def rng(key, default):
        if key not in domain:
            return default
        pair = domain[key]
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"'surface.domain.{key}' must be [lo, hi]")
        return (float(pair[0]), float(pair[1]))

    if kind == "flat_disk":
        _no_unknown(params, {"point", "frame", "extent"}, "surface.params")
        point = _vec(_require(params, "point", "surface.params"), n, "surface.params.point")
        frame_rows = _require(params, "frame", "surface.params")
        vectors = np.array([_vec(row, n, "surface.params.frame") for row in frame_rows])
        q, _ = np.linalg.qr(vectors.T)
        patch = flat_disk(point, Frame(q.T),
                          _float(_require(params, "extent", "surface.params"),
                                 "surface.params.extent", positive=True))
    elif kind == "catenoid":
        if n != 3:
            raise ConfigError("catenoid requires ambient.n = 3")
        _no_unknown(params, {"scale"}, "surface.params")
        _no_unknown(domain, {"u", "v"}, "surface.domain")
        patch = catenoid(scale=params.get("scale", 1.0),
                         u_range=rng("u", (-np.pi, np.pi)),
                         v_range=rng("v", (-1.0, 1.0)))
    elif kind == "helicoid":
        if n != 3:
            raise ConfigError("helicoid requires ambient.n = 3")
        _no_unknown(params, {"pitch"}, "surface.params")
        _no_unknown(domain, {"u", "v"}, "surface.domain")
        patch = helicoid(pitch=params.get("pitch", 1.0),
                         u_range=rng("u", (-np.pi, np.pi)),
                         v_range=rng("v", (-1.0, 1.0)))
    elif kind == "enneper":
        if n != 3:
            raise ConfigError("enneper requires ambient.n = 3")
        _no_unknown(params, {"extent"}, "surface.params")
        patch = enneper(extent=params.get("extent", 0.5))
    elif kind == "complex_parabola":
        if n != 4:
            raise ConfigError("complex_parabola requires ambient.n = 4")
        _no_unknown(params, {"extent"}, "surface.params")
        patch = complex_parabola(extent=params.get("extent", 1.0))
    else:
        raise ConfigError(
            "'surface.kind' must be one of flat_disk|catenoid|helicoid|"
            "enneper|complex_parabola"
        )
    return kind, patch


def _parse_radii(table: dict) -> tuple:
    path = "sweep"
    _no_unknown(table, {"radii", "r_lo", "r_hi", "count", "spacing", "r_max"}, path)
    if "radii" in table:
        for key in ("r_lo", "r_hi", "count", "spacing"):
            if key in table:
                raise ConfigError("'sweep.radii' excludes r_lo/r_hi/count/spacing")
        radii = np.asarray(table["radii"], dtype=float)
    else:
        r_lo = _float(_require(table, "r_lo", path), "sweep.r_lo", positive=True)
        r_hi = _float(_require(table, "r_hi", path), "sweep.r_hi", positive=True)
        count = _require(table, "count", path)
        if isinstance(count, bool) or not isinstance(count, int) or count < 2:
            raise ConfigError("'sweep.count' must be an integer >= 2")
        spacing = table.get("spacing", "linear")
        if spacing == "linear":
            radii = np.linspace(r_lo, r_hi, count)
        elif spacing == "log":
            radii = np.geomspace(r_lo, r_hi, count)
        else:
            raise ConfigError("'sweep.spacing' must be linear|log")
    if radii.ndim != 1 or radii.size == 0:
        raise ConfigError("'sweep' produced an empty radius grid")
    if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ConfigError("'sweep' radii must be positive and strictly increasing")
    r_max = float(table.get("r_max", radii[-1]))
    if r_max < radii[-1]:
        raise ConfigError("'sweep.r_max' must be >= the largest radius")
    return radii, r_max


def parse_config(path: str) -> Config:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None

    _no_unknown(raw, {"ambient", "mobius", "surface", "sweep", "quadrature", "checks"}, "top level")
    ambient = _require(raw, "ambient", "top level")
    _no_unknown(ambient, {"n"}, "ambient")
    n = _require(ambient, "n", "ambient")
    if isinstance(n, bool) or not isinstance(n, int) or not 2 <= n <= 8:
        raise ConfigError("'ambient.n' must be an integer in [2, 8]")

    mobius_table = _require(raw, "mobius", "top level")
    _no_unknown(mobius_table, {"word"}, "mobius")
    word = _parse_word(_require(mobius_table, "word", "mobius"), n)

    kind, patch = _parse_surface(_require(raw, "surface", "top level"), n)
    radii, r_max = _parse_radii(_require(raw, "sweep", "top level"))

    quad = raw.get("quadrature", {})
    _no_unknown(quad, {"tol", "max_depth"}, "quadrature")
    tol = _float(quad.get("tol", DEFAULT_TOL), "quadrature.tol", positive=True)
    max_depth = quad.get("max_depth", DEFAULT_MAX_DEPTH)
    if isinstance(max_depth, bool) or not isinstance(max_depth, int) or max_depth < 1:
        raise ConfigError("'quadrature.max_depth' must be a positive integer")

    checks_table = raw.get("checks", {})
    _no_unknown(checks_table, set(_CHECK_NAMES) | {"prescribed_point_a"}, "checks")
    checks = {}
    for name in _CHECK_NAMES:
        value = checks_table.get(name, name in ("volume_identity", "weighted_identity"))
        if not isinstance(value, bool):
            raise ConfigError(f"'checks.{name}' must be a boolean")
        checks[name] = value
    prescribed = None
    if "prescribed_point_a" in checks_table:
        prescribed = _vec(checks_table["prescribed_point_a"], n, "checks.prescribed_point_a")
    if checks["prescribed_point"] and prescribed is None:
        raise ConfigError("'checks.prescribed_point' requires 'checks.prescribed_point_a'")

    # degenerate-radius rule: r_max must stay well inside the pole sphere
    b = None
    if len(word) == 1 and isinstance(word[0].surface, Sphere):
        b = word[0].surface.center
    if b is not None and r_max > 0.99 * float(np.linalg.norm(b)):
        raise ConfigError(
            "'sweep.r_max' exceeds 0.99|b| (degenerate-radius rule: the ball "
            "image blows up as r approaches |b|)"
        )

    return Config(
        n=n, word=word, surface_kind=kind, patch=patch, radii=radii,
        r_max=r_max, tol=tol, max_depth=max_depth, checks=checks,
        prescribed_point=prescribed, raw=raw,
    )
