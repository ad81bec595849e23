"""Command-line front end: ``prostar <command> --scene PATH``.

Exit codes: 0 when every check passes, 1 when a construction fails or a check
exceeds its tolerance, 2 when the scene cannot be parsed or a name does not
resolve.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import _tol
from .errors import ConstructionError, ProstarError, SceneError
from .poset import label_str
from .scene import Scene

SCHEMA = 1
COMMANDS = ("validate", "dilate", "represent", "stinespring", "tensor", "module-embed", "module-tensor")


def num(x):
    """JSON-ready number with 12 significant digits; complex becomes ``[re, im]``."""
    if isinstance(x, (complex, np.complexfloating)):
        return [num(x.real), num(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if math.isnan(x):
        return "NaN"
    v = float(f"{x:.12g}")
    return 0.0 if v == 0 else v


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if obj.ndim > 1:
            return [jsonable(r) for r in obj]
        if np.iscomplexobj(obj):
            return [num(complex(v)) for v in obj]
        return [num(v) for v in obj.tolist()]
    if isinstance(obj, (str, type(None))):
        return obj
    return num(obj)


class Report:
    def __init__(self, command: str, scene: str):
        self.data = {"schema": SCHEMA, "command": command, "scene": scene, "status": None, "checks": []}

    def check(self, name: str, residual: float, tol: float):
        self.data["checks"].append({"name": name, "residual": residual, "tol": tol, "pass": bool(residual <= tol)})

    def flag(self, name: str, ok: bool):
        self.data["checks"].append({"name": name, "pass": bool(ok)})

    def set(self, key, value):
        self.data[key] = value

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.data["checks"])


def _dims(space) -> dict:
    return {label_str(lam): space.dims[lam] for lam in space.poset}


def _op_residual(ops) -> float:
    return max((op.residual for op in ops), default=0.0)


def _coherence_tol(ops) -> float:
    return max((_tol.atol(*op.levels.values()) for op in ops), default=_tol.scale())


def _gram_tol(k) -> float:
    return 10 * _tol.scale() * (1.0 + _tol.spectral_norm(k.gram(k.space.top)))


def cmd_validate(scene: Scene, rep: Report):
    from .csmodule import AbstractHilbertModule, check_module
    from .kernel import is_hermitian, is_positive_semidefinite
    from .lochilbert import transitivity_residual

    props = {}
    for name in scene.names("posets"):
        scene.get("posets", name)
        rep.flag(f"poset:{name}", True)
    for name in scene.names("spaces"):
        H = scene.get("spaces", name)
        rep.check(f"space:{name}:transitivity", transitivity_residual(H), _tol.atol(*H.ambient_isometries.values()))
    for name in scene.names("operators"):
        T = scene.get("operators", name)
        rep.check(f"operator:{name}:coherence", T.residual, _coherence_tol([T]))
    for name in scene.names("algebras"):
        A = scene.get("algebras", name)
        rep.check(f"algebra:{name}:structure", A.structure_residual(), _tol.verify_tol(*(b.top for b in A.basis)))
        props[f"algebra:{name}"] = {"dim": A.dim}
    for name in scene.names("systems"):
        S = scene.get("systems", name)
        rep.flag(f"system:{name}", True)
        props[f"system:{name}"] = {"dim": S.dim}
    for name in scene.names("kernels"):
        k = scene.get("kernels", name)
        props[f"kernel:{name}"] = {"hermitian": is_hermitian(k), "positive_semidefinite": is_positive_semidefinite(k)}
    for name in scene.names("semigroups"):
        S = scene.get("semigroups", name)
        rep.flag(f"semigroup:{name}", True)
        props[f"semigroup:{name}"] = {"order": len(S), "group": S.is_group()}
    for name in scene.names("actions"):
        scene.get("actions", name)
        rep.flag(f"action:{name}", True)
    for name in scene.names("cp_maps"):
        scene.get("cp_maps", name)
        rep.flag(f"cp_map:{name}", True)
    for name in scene.names("modules"):
        M = scene.get("modules", name)
        if isinstance(M, AbstractHilbertModule):
            r = check_module(M)
            rep.check(f"module:{name}:hermitian", r.hermitian_residual, _tol.atol(*M.gramian.values()))
            props[f"module:{name}"] = {"definite": r.definite, "undefined_actions": len(r.undefined_actions)}
        else:
            rep.flag(f"module:{name}", True)
    if props:
        rep.set("properties", props)


def cmd_dilate(scene: Scene, rep: Report):
    from .dilation import invariant_dilation, kolmogorov

    k = scene.get("kernels", scene.arg("kernel"))
    order = scene.arg("order", "descending")
    tol = _gram_tol(k)
    sg_name = scene.arg("semigroup", required=False)
    if sg_name is None:
        D = kolmogorov(k, order)
        rep.check("factorization", D.residual, tol)
        rep.check("coherence:V", _op_residual(D.V.values()), _coherence_tol(D.V.values()))
        rep.flag("minimal", D.minimal)
        rep.set("dims", _dims(D.space))
        rep.set("rank", D.rank)
        return
    S = scene.get("semigroups", sg_name)
    act = scene.get("actions", scene.arg("action"))
    dil = invariant_dilation(k, S, act, order)
    D = dil.decomposition
    for name in ("factorization", "multiplicative", "star", "intertwining"):
        rep.check(name, dil.residuals[name], tol)
    rep.check("coherence:V", _op_residual(D.V.values()), _coherence_tol(D.V.values()))
    rep.check("coherence:pi", _op_residual(dil.pi.values()), _coherence_tol(dil.pi.values()))
    rep.flag("minimal", D.minimal)
    rep.set("dims", _dims(D.space))
    rep.set("rank", D.rank)
    rep.set("certificates", [{"s": str(s), "lambda": label_str(lam), "c": c} for (s, lam), c in dil.certificates.items()])


def cmd_represent(scene: Scene, rep: Report):
    from .localg import gelfand_naimark_rep

    sys_ = scene.get("systems", scene.arg("system"))
    R = gelfand_naimark_rep(sys_)
    t = _tol.verify_tol(*(img.top for img in R.images))
    rep.check("multiplicative", R.report.multiplicative_residual, t)
    rep.check("star", R.report.star_residual, t)
    rep.check("coherence_square", R.report.coherence_residual, t)
    rep.check("coherence:pi", _op_residual(R.images), _coherence_tol(R.images))
    for lam, ok in R.report.faithful.items():
        rep.flag(f"faithful:{label_str(lam)}", ok)
    rep.set("dims", _dims(R.space))
    rep.set("algebra_dim", sys_.dim)


def cmd_stinespring(scene: Scene, rep: Report):
    from .dilation import stinespring

    A, images = scene.get("cp_maps", scene.arg("cp_map"))
    limit = int(scene.arg("limit", 64))
    st = stinespring(A, images, limit=limit)
    k = st.dilation.decomposition.kernel
    tol = _gram_tol(k)
    for name, r in st.residuals.items():
        rep.check(name, r, tol)
    rep.check("coherence:pi", _op_residual(st.pi), _coherence_tol(st.pi))
    rep.check("coherence:W", st.W.residual, _coherence_tol([st.W]))
    rep.set("dims", _dims(st.space))
    rep.set("semigroup_order", len(st.dilation.action.semigroup))
    rep.set("certificates", [{"s": str(s), "lambda": label_str(lam), "c": c}
                             for (s, lam), c in st.dilation.certificates.items()])


def cmd_tensor(scene: Scene, rep: Report):
    from .lochilbert import tensor_space
    from .localg import cross_seminorm_residual, spatial_tensor
    from .locop import adjoint, seminorm, tensor_op

    if "spaces" in scene.args:
        H, K = (scene.get("spaces", n) for n in _two(scene.arg("spaces")))
        HK = tensor_space(H, K)
        iso = max(_tol.residual(j.conj().T @ j - np.eye(j.shape[1])) for j in HK.ambient_isometries.values())
        rep.check("isometry", iso, _tol.atol(*HK.ambient_isometries.values()))
        rep.set("dims", _dims(HK))
    elif "operators" in scene.args:
        T, S = (scene.get("operators", n) for n in _two(scene.arg("operators")))
        TS = tensor_op(T, S)
        rep.check("coherence", TS.residual, _coherence_tol([TS]))
        adj = tensor_op(adjoint(T), adjoint(S))
        rep.check("adjoint", max(_tol.residual(TS.H[l] - adj[l]) for l in TS.domain.poset), _coherence_tol([TS]))
        cross = cross_seminorm_residual(T, S)
        rep.check("cross_seminorm", cross, _tol.verify_tol(TS.top))
        rep.set("seminorms", {label_str(l): seminorm(TS, l) for l in TS.domain.poset})
        rep.set("dims", _dims(TS.domain))
    elif "algebras" in scene.args:
        A, B = (scene.get("algebras", n) for n in _two(scene.arg("algebras")))
        AB = spatial_tensor(A, B)
        rep.flag("dimension", AB.dim == A.dim * B.dim)
        rep.check("structure", AB.structure_residual(), _tol.verify_tol(*(b.top for b in AB.basis)))
        rep.check("coherence", _op_residual(AB.basis), _coherence_tol(AB.basis))
        rep.set("algebra_dim", AB.dim)
        rep.set("dims", _dims(AB.carrier))
    else:
        raise SceneError("tensor needs 'spaces', 'operators' or 'algebras' in args")


def _two(v):
    if not (isinstance(v, list) and len(v) == 2):
        raise SceneError("expected a pair of names")
    return v


def cmd_module_embed(scene: Scene, rep: Report):
    from .csmodule import ConcreteHilbertModule, check_module, operator_model

    M = scene.get("modules", scene.arg("module"))
    if isinstance(M, ConcreteHilbertModule):
        M = M.to_abstract()
    r = check_module(M)
    om = operator_model(M)
    tol = _gram_tol(om.decomposition.kernel)
    rep.check("gramian", om.residuals["gramian"], tol)
    rep.check("action", om.residuals["action"], tol)
    rep.check("coherence:Phi", _op_residual(om.Phi.values()), _coherence_tol(om.Phi.values()))
    rep.set("dims", _dims(om.decomposition.space))
    rep.set("definite", r.definite)
    rep.set("undefined_actions", [list(p) for p in r.undefined_actions])


def cmd_module_tensor(scene: Scene, rep: Report):
    from .csmodule import exterior_tensor, exterior_tensor_residuals

    E, F = (scene.get("modules", n) for n in _two(scene.arg("modules")))
    for name, M in (("left", E), ("right", F)):
        if not hasattr(M, "elements"):
            raise SceneError(f"module-tensor needs concrete modules; the {name} one is abstract")
    EF = exterior_tensor(E, F)
    res = exterior_tensor_residuals(E, F, EF)
    rep.check("gramian", res["gramian"], 1e-10)
    rep.check("action", res["action"], 1e-10)
    rep.check("coherence", _op_residual(EF.elements), _coherence_tol(EF.elements))
    rep.set("elements", len(EF.elements))
    rep.set("algebra_dim", EF.algebra.dim)
    rep.set("dims", {"H": _dims(EF.H), "K": _dims(EF.K)})


HANDLERS = {
    "validate": cmd_validate,
    "dilate": cmd_dilate,
    "represent": cmd_represent,
    "stinespring": cmd_stinespring,
    "tensor": cmd_tensor,
    "module-embed": cmd_module_embed,
    "module-tensor": cmd_module_tensor,
}


def run(command: str, scene_path, tol: float | None = None, stable: bool = False) -> tuple:
    """Run one command; returns ``(report dict, exit code)``."""
    rep = Report(command, Path(scene_path).name)
    start = time.perf_counter()
    code = 0
    with _tol.tolerance_scale(tol if tol is not None else _tol.DEFAULT_SCALE):
        try:
            scene = Scene.load(scene_path)
            HANDLERS[command](scene, rep)
            code = 0 if rep.passed else 1
            rep.set("status", "pass" if code == 0 else "fail")
        except SceneError as exc:
            code = 2
            rep.set("status", "error")
            rep.set("error", {"type": type(exc).__name__, "message": str(exc)})
        except (ValueError, TypeError, KeyError) as exc:
            code = 2
            rep.set("status", "error")
            rep.set("error", {"type": "ParseError", "message": f"{type(exc).__name__}: {exc}"})
        except ConstructionError as exc:
            code = 1
            rep.set("status", "fail")
            rep.set("error", {"type": type(exc).__name__, "message": str(exc), "details": exc.details()})
        except ProstarError as exc:
            code = 1
            rep.set("status", "fail")
            rep.set("error", {"type": type(exc).__name__, "message": str(exc)})
    if not stable:
        rep.set("wall_time", time.perf_counter() - start)
    return jsonable(rep.data), code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="prostar", description="Verify coherent dilation constructions on scene files.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--scene", required=True, help="scene JSON file")
    parser.add_argument("--out", help="write the report here instead of standard output")
    parser.add_argument("--tol", type=float, help="tolerance scale factor (default 1e-9)")
    parser.add_argument("--stable", action="store_true", help="omit wall time so reports compare byte for byte")
    args = parser.parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    report, code = run(args.command, args.scene, args.tol, args.stable)
    text = json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
