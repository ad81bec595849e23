"""Scene files: one JSON document of named objects plus command arguments.

Matrices are row-major nested lists whose entries are numbers or ``[re, im]``
pairs.  Objects are built lazily on first reference so a scene only pays for
what its command touches, and a reference cycle or a missing name surfaces as
:class:`UnresolvedReference`.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError, UnresolvedReference
from .kernel import (OperatorKernel, StarSemigroup, action_from_table, cyclic_group, kernel_from_blocks, klein_group,
                     permutation_action, scalar_kernel, trivial_semigroup)
from .lochilbert import make_space
from .localg import MatrixProjectiveSystem, full_algebra, make_algebra, matrix_algebra
from .locop import LocallyBoundedOperator, from_top
from .poset import poset_from_json

SECTIONS = ("posets", "spaces", "operators", "algebras", "systems", "kernels", "semigroups", "actions",
            "cp_maps", "modules")


def parse_scalar(x) -> complex:
    if isinstance(x, bool):
        raise ParseError(f"expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ParseError(f"expected a number or [re, im] pair, got {x!r}")


def parse_vector(data) -> np.ndarray:
    if not isinstance(data, list):
        raise ParseError(f"expected a vector, got {data!r}")
    return np.array([parse_scalar(x) for x in data], dtype=complex)


def parse_matrix(data, shape=None) -> np.ndarray:
    if not isinstance(data, list):
        raise ParseError(f"expected a matrix, got {data!r}")
    rows = [parse_vector(r) for r in data]
    if rows and len({len(r) for r in rows}) != 1:
        raise ParseError("matrix rows have different lengths")
    m = np.array(rows, dtype=complex) if rows else np.zeros((0, 0), complex)
    if shape is not None:
        if m.size == 0 and int(np.prod(shape)) == 0:
            return np.zeros(shape, complex)
        if m.shape != tuple(shape):
            raise ParseError(f"expected a {shape[0]}x{shape[1]} matrix, got {m.shape[0]}x{m.shape[1] if m.ndim > 1 else 0}")
    return m


def _pair_key(key: str, what: str) -> tuple:
    parts = key.split(",")
    if len(parts) != 2:
        raise ParseError(f"{what} key {key!r} must look like 'a,b'")
    return parts[0].strip(), parts[1].strip()


class Scene:
    def __init__(self, data: dict, base: Path | None = None):
        if not isinstance(data, dict):
            raise ParseError("a scene must be a JSON object")
        for key in data:
            if key not in SECTIONS + ("args", "description"):
                raise ParseError(f"unknown scene section {key!r}")
        self.data = data
        self.args = data.get("args", {})
        if not isinstance(self.args, dict):
            raise ParseError("'args' must be an object")
        self._cache: dict = {}
        self._building: set = set()

    @classmethod
    def load(cls, path) -> "Scene":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ParseError(f"cannot read scene {str(path)!r}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
        return cls(data, path.parent)

    def names(self, section: str) -> list:
        sec = self.data.get(section, {})
        if not isinstance(sec, dict):
            raise ParseError(f"section {section!r} must be an object")
        return list(sec)

    def arg(self, name: str, default=None, required=True):
        if name in self.args:
            return self.args[name]
        if required and default is None:
            raise ParseError(f"command argument {name!r} is missing")
        return default

    def get(self, section: str, name):
        if not isinstance(name, str):
            raise ParseError(f"references must be names, got {name!r}")
        key = (section, name)
        if key in self._cache:
            return self._cache[key]
        cfg = self.data.get(section, {}).get(name)
        if cfg is None:
            raise UnresolvedReference(f"no {section[:-1]} named {name!r}")
        if not isinstance(cfg, dict):
            raise ParseError(f"{section[:-1]} {name!r} must be an object")
        if key in self._building:
            raise UnresolvedReference(f"circular reference through {section[:-1]} {name!r}")
        self._building.add(key)
        try:
            obj = getattr(self, "_build_" + section)(name, cfg)
        finally:
            self._building.discard(key)
        self._cache[key] = obj
        return obj

    def _field(self, cfg, key, name, kind=None):
        if not isinstance(cfg, dict) or key not in cfg:
            raise ParseError(f"{name!r} is missing field {key!r}")
        v = cfg[key]
        if kind is not None and not isinstance(v, kind):
            raise ParseError(f"field {key!r} of {name!r} has the wrong type")
        return v

    def _build_posets(self, name, cfg):
        if not isinstance(cfg, dict) or not isinstance(cfg.get("elements"), list):
            raise ParseError(f"poset {name!r} needs an 'elements' list")
        for e in cfg["elements"]:
            if not isinstance(e, str):
                raise ParseError(f"poset labels must be strings, got {e!r}")
        for p in cfg.get("leq", []):
            if not (isinstance(p, list) and len(p) == 2):
                raise ParseError(f"leq entries of {name!r} must be pairs")
        return poset_from_json(cfg)

    def _build_spaces(self, name, cfg):
        P = self.get("posets", self._field(cfg, "poset", name, str))
        dims = self._field(cfg, "dims", name, dict)
        for v in dims.values():
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError(f"dimensions of {name!r} must be integers")
        emb = cfg.get("embeddings", "coordinate")
        if isinstance(emb, dict):
            top = P.top
            if top not in dims:
                raise ParseError(f"space {name!r} lacks the top dimension")
            emb = {lam: parse_matrix(m, (dims[top], dims.get(lam, 0))) for lam, m in emb.items()}
        elif emb != "coordinate":
            raise ParseError(f"embeddings of {name!r} must be 'coordinate' or an object")
        return make_space(P, dims, emb)

    def _build_operators(self, name, cfg):
        H = self.get("spaces", self._field(cfg, "domain", name, str))
        K = self.get("spaces", cfg.get("codomain", cfg["domain"]))
        if "top" in cfg:
            return from_top(H, K, parse_matrix(cfg["top"], (K.dim, H.dim)))
        levels = self._field(cfg, "levels", name, dict)
        for lam in levels:
            if lam not in H.poset:
                raise ParseError(f"operator {name!r} has a level {lam!r} outside its poset")
        mats = {lam: parse_matrix(levels[lam], (K.dims[lam], H.dims[lam])) for lam in H.poset if lam in levels}
        if len(mats) != len(H.poset):
            missing = [lam for lam in H.poset if lam not in levels]
            raise ParseError(f"operator {name!r} lacks levels {missing}")
        return LocallyBoundedOperator(H, K, mats)

    def _build_algebras(self, name, cfg):
        if "matrix" in cfg:
            n = cfg["matrix"]
            if not isinstance(n, int) or n < 1:
                raise ParseError(f"'matrix' of {name!r} must be a positive integer")
            return matrix_algebra(n)
        H = self.get("spaces", self._field(cfg, "carrier", name, str))
        if cfg.get("full"):
            return full_algebra(H)
        gens = self._field(cfg, "generators", name, list)
        return make_algebra(H, [self.get("operators", g) for g in gens])

    def _build_systems(self, name, cfg):
        P = self.get("posets", self._field(cfg, "poset", name, str))
        raw = self._field(cfg, "bases", name, dict)
        bases = {}
        for lam in P:
            if lam not in raw:
                raise ParseError(f"system {name!r} lacks a basis at {lam!r}")
            mats = [parse_matrix(m) for m in raw[lam]]
            if mats and len({m.shape for m in mats}) != 1:
                raise ParseError(f"basis matrices at {lam!r} differ in shape")
            bases[lam] = np.array(mats) if mats else np.zeros((0, 0, 0), complex)
        maps = {}
        for entry in cfg.get("maps", []):
            lo, hi = self._field(entry, "lower", name, str), self._field(entry, "upper", name, str)
            maps[(lo, hi)] = parse_matrix(self._field(entry, "matrix", name, list))
        return MatrixProjectiveSystem(P, bases, maps)

    def _build_kernels(self, name, cfg):
        if "scalar" in cfg:
            g = parse_matrix(cfg["scalar"])
            if g.shape[0] != g.shape[1]:
                raise ParseError(f"scalar kernel {name!r} must be square")
            return scalar_kernel(g, cfg.get("points"))
        H = self.get("spaces", self._field(cfg, "space", name, str))
        points = self._field(cfg, "points", name, list)
        if "gram" in cfg:
            n = len(points) * H.dim
            return kernel_from_blocks(H, points, parse_matrix(cfg["gram"], (n, n)))
        raw = self._field(cfg, "values", name, dict)
        values = {}
        for key, ref in raw.items():
            values[_pair_key(key, "kernel value")] = self.get("operators", ref)
        for x in points:
            for y in points:
                if (x, y) not in values:
                    raise ParseError(f"kernel {name!r} lacks the value at {x},{y}")
        return OperatorKernel(tuple(points), H, values)

    def _build_semigroups(self, name, cfg):
        if "cyclic" in cfg:
            return cyclic_group(int(cfg["cyclic"]))
        if cfg.get("klein"):
            return klein_group()
        if cfg.get("trivial"):
            return trivial_semigroup()
        elements = self._field(cfg, "elements", name, list)
        mult = {_pair_key(k, "mult"): v for k, v in self._field(cfg, "mult", name, dict).items()}
        star = self._field(cfg, "star", name, dict)
        return StarSemigroup(tuple(elements), mult, star, cfg.get("unit"))

    def _build_actions(self, name, cfg):
        S = self.get("semigroups", self._field(cfg, "semigroup", name, str))
        if "kernel" in cfg:
            points = self.get("kernels", cfg["kernel"]).points
        else:
            points = tuple(self._field(cfg, "points", name, list))
        if "perms" in cfg:
            return permutation_action(S, points, cfg["perms"])
        table = {}
        for key, v in self._field(cfg, "table", name, dict).items():
            s, x = _pair_key(key, "action")
            table[(s, x)] = {y: parse_scalar(c) for y, c in v.items()} if isinstance(v, dict) else v
        return action_from_table(S, points, table)

    def _build_cp_maps(self, name, cfg):
        A = self.get("algebras", self._field(cfg, "algebra", name, str))
        if "kraus" in cfg:
            ks = [self.get("operators", c) for c in cfg["kraus"]]
            if not ks:
                raise ParseError(f"cp map {name!r} needs at least one Kraus operator")
            images = [sum((C.H @ b @ C for C in ks[1:]), ks[0].H @ b @ ks[0]) for b in A.basis]
        else:
            images = [self.get("operators", r) for r in self._field(cfg, "images", name, list)]
        return A, images

    def _build_modules(self, name, cfg):
        from .csmodule import AbstractHilbertModule, ConcreteHilbertModule

        A = self.get("algebras", self._field(cfg, "algebra", name, str))
        if "elements" in cfg:
            H = self.get("spaces", self._field(cfg, "H", name, str))
            K = self.get("spaces", self._field(cfg, "K", name, str))
            return ConcreteHilbertModule(H, K, [self.get("operators", e) for e in cfg["elements"]], A)
        gens = self._field(cfg, "generators", name, list)
        index = {g: i for i, g in enumerate(gens)}

        def idx(key, what):
            a, b = _pair_key(key, what)
            try:
                return (index[a] if a in index else int(a)), (index[b] if b in index else int(b))
            except ValueError:
                raise ParseError(f"{what} key {key!r} must use generator names or indices") from None

        gram = {idx(k, "gramian"): parse_vector(v) for k, v in self._field(cfg, "gramian", name, dict).items()}
        action = {}
        for k, v in cfg.get("action", {}).items():
            g, b = _pair_key(k, "action")
            action[(index[g] if g in index else int(g), int(b))] = parse_vector(v)
        return AbstractHilbertModule(A, tuple(gens), gram, action)
