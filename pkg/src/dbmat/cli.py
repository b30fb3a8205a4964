"""
Command-line interface.

Every command reads named objects from a model file (``--model``), runs
one computation and emits a report holding the command echo, the
configuration, a headline verdict and the computed objects.  Exit codes:
0 when the headline verdict holds, 1 when it fails, 2 on any error.
Reports carry no wall-clock data unless ``--timing`` is given, so equal
inputs give byte-identical JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import classes, debranges, factorization, localstruct, parametrize
from .generators import SamplingError, gen_k0
from .grids import parse_grid
from .modelfile import ModelError, decode_scalar, parse
from .ratmat import RatMat, RationalError
from .verdict import Verdict, jsonable

__all__ = ["main", "build_parser", "run"]

EXACT_DEFAULT = {"verify", "db-construct", "uniq"}
FLOAT_DEFAULT = {"factor", "local"}


class CliError(Exception):
    pass


# -------------
# Argument parsing
# -------------

def build_parser():
    p = argparse.ArgumentParser(prog="dbmat", description="de Branges matrix toolbox")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", "-m", help="model file (JSON)")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--grid", default="", help="sample grid spec, e.g. "
                        "'upper=-5:5:21/0.1,0.5,1,2,5;real=-10:10:41;pj=20'")
    common.add_argument("--mode", choices=("exact", "float"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--timing", action="store_true",
                        help="add elapsed seconds to the report (breaks byte identity)")
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    c = cmd("classify", "all function-class memberships of a matrix")
    c.add_argument("obj")
    c.add_argument("--J", choices=("jscr", "j"), default="jscr")
    c = cmd("pg", "Potapov-Ginzburg transform")
    c.add_argument("obj")
    c.add_argument("--J", choices=("jscr", "j"), default="jscr")
    c = cmd("factor", "entire-factor extraction P(z) F(z)")
    c.add_argument("obj")
    c = cmd("cofactor", "one entire factor for several matrices")
    c.add_argument("objs", nargs="+")
    c = cmd("local", "local Smith data and chains")
    c.add_argument("obj")
    c.add_argument("--point", help="complex point, e.g. 1+2j (default: every pole)")
    c = cmd("db-check", "de Branges matrix certification and Lemma items")
    c.add_argument("obj")
    c.add_argument("--n", type=int)
    c = cmd("db-decompose", "split a de Branges matrix into (E-, E+, S, P, Q)")
    c.add_argument("obj")
    c.add_argument("--n", type=int)
    c.add_argument("--method", choices=("lcm", "cofactor"), default="lcm")
    c = cmd("db-construct", "de Branges matrix from (pair, S, P, Q)")
    c.add_argument("--pair", required=True)
    c.add_argument("--assoc", required=True)
    c.add_argument("--P", default="0")
    c.add_argument("--Q", default="0")
    c = cmd("kernel", "reproducing kernel K_w(z) or z -> K_w(z)")
    c.add_argument("--pair", required=True)
    c.add_argument("--w", required=True)
    c.add_argument("--z")
    c = cmd("gram", "Gram matrix positivity at random points")
    c.add_argument("--pair", required=True)
    c.add_argument("--count", type=int, default=8)
    c = cmd("inner-product", "space membership and inner product")
    c.add_argument("--pair", required=True)
    c.add_argument("--f", required=True)
    c.add_argument("--g", required=True)
    c = cmd("assoc-check", "associated-function test for S")
    c.add_argument("--pair", required=True)
    c.add_argument("--assoc", required=True)
    c = cmd("charfn", "characteristic function of a finite K0 operator")
    c.add_argument("--op", help="k0_operator object (default: random, from --seed)")
    c.add_argument("--dim", type=int, default=4)
    c.add_argument("--n", type=int, default=1)
    c = cmd("verify", "full parametrization identity suite")
    c.add_argument("obj")
    c.add_argument("--n", type=int)
    c = cmd("uniq", "uniqueness relation between two de Branges matrices")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--n", type=int)
    return p


# -------------
# Object access
# -------------

class Ctx:
    def __init__(self, args):
        self.args = args
        self.grid = parse_grid(args.grid)
        self.tol = args.tol
        mode = args.mode
        if mode is None:
            mode = "exact" if args.command in EXACT_DEFAULT else (
                "float" if args.command in FLOAT_DEFAULT else None)
        self.model = parse(args.model) if args.model else None
        if self.model is not None and mode == "exact" and self.model.mode == "float":
            raise CliError("exact mode needs an exact model file")
        self.mode = mode or (self.model.mode if self.model else "exact")

    @property
    def floating(self):
        return self.mode == "float"

    def get(self, name):
        if self.model is None:
            raise CliError("this command needs --model")
        try:
            return self.model[name]
        except KeyError as err:
            raise CliError(err.args[0]) from None

    def matrix(self, name, n=None):
        """(RatMat, n) from a rational_matrix or db_matrix object."""
        o = self.get(name)
        if isinstance(o, tuple) and o[0] == "db_matrix":
            n, A = o[1], o[2]
        elif isinstance(o, RatMat):
            A = o
        else:
            raise CliError(f"object {name!r} is not a matrix")
        if n is None:
            n = A.rows // 2
        return (A.to_float() if self.floating else A), n

    def pair(self, name):
        o = self.get(name)
        if not isinstance(o, debranges.DeBrangesPair):
            raise CliError(f"object {name!r} is not a pair")
        if self.floating:
            o = debranges.DeBrangesPair(o.E_minus.to_float(), o.E_plus.to_float(),
                                        validate=False)
        return o

    def rat(self, name):
        o = self.get(name)
        if not isinstance(o, RatMat):
            raise CliError(f"object {name!r} is not a rational_matrix")
        return o.to_float() if self.floating else o

    def const(self, text, n):
        """An object name or a scalar literal (times I_n)."""
        if self.model is not None and text in self.model.objects:
            return self.rat(text)
        try:
            c = decode_scalar(text, not self.floating, "argument")
        except ModelError as err:
            raise CliError(f"{text!r} is neither an object nor a scalar") from err
        return RatMat.eye(n, exact=not self.floating) * c


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as err:
        raise CliError(f"bad complex number {text!r}") from err


# -------------
# Commands
# -------------

def _classify(ctx):
    a = ctx.args
    F = ctx.rat(a.obj) if not isinstance(ctx.get(a.obj), tuple) else ctx.matrix(a.obj)[0]
    kids = [classes.in_hardy2(F), classes.in_hardy2_perp(F), classes.in_smirnov(F)]
    if F.is_square():
        kids += [classes.in_inner(F, ctx.tol), classes.in_schur(F, ctx.grid, ctx.tol),
                 classes.in_caratheodory(F, ctx.tol)[0]]
        if F.rows % 2 == 0:
            sig = classes.make_signature(F.rows // 2)
            J = sig.Jscr if a.J == "jscr" else sig.j
            kids += [classes.in_PJ(F, J, ctx.grid, ctx.tol), classes.in_UJ(F, J, ctx.tol)]
    head = Verdict(True, "classification", children=kids)
    return head, {"classes": {k.name: k.member for k in kids}}


def _pg(ctx):
    a = ctx.args
    A, n = ctx.matrix(a.obj)
    sig = classes.make_signature(n)
    J = sig.Jscr if a.J == "jscr" else sig.j
    G = classes.pg_transform(A, J)
    v = classes.in_inner(G, ctx.tol)
    v.name = "PG(A) inner"
    return Verdict(True, "PG transform", children=[v]), {"PG": G}


def _factor(ctx):
    F = ctx.rat(ctx.args.obj)
    form = factorization.factorize(F)
    norms = factorization.residue_norms(form)
    worst = max((r for r, _ in norms.values()), default=0.0)
    law = [ok for s in form.steps for _, _, ok in s.get("law", [])]
    kids = [Verdict(form.pole_free, "G rational part pole-free",
                    {"den": form.rational.den}),
            Verdict(worst < 1e-8, "residue norms < 1e-8", {"max": worst}),
            Verdict(all(law), "multiplicity law", {"steps": form.steps})]
    return Verdict.all_of("factorization", kids), {
        "product": form.product, "G": form.rational,
        "residue_norms": {str(jsonable(k)): v for k, v in norms.items()},
        "steps": form.steps}


def _cofactor(ctx):
    Fs = [ctx.rat(o) for o in ctx.args.objs]
    product, forms = factorization.cofactorize(Fs)
    kids = [Verdict(f.pole_free, f"{name} pole-free", {"den": f.rational.den})
            for name, f in zip(ctx.args.objs, forms)]
    return Verdict.all_of("common factorization", kids), {
        "product": product, "rational_part": product.rational_part(),
        "G": {name: f.rational for name, f in zip(ctx.args.objs, forms)}}


def _local(ctx):
    F = ctx.rat(ctx.args.obj)
    pts = [_complex(ctx.args.point)] if ctx.args.point else [p for p, _ in F.to_float().poles()]
    out, kids = [], []
    for z0 in pts:
        d = localstruct.local_smith(F, z0)
        chains = localstruct.canonical_chains(F, z0, "pole") if d.pole_mults else []
        out.append({**d.to_dict(), "pole_chain_lengths": [c.length for c in chains]})
        kids.append(Verdict(d.conserved, f"exponents sum to det order at {complex(z0):.6g}",
                            {"partial_mults": list(d.partial_mults),
                             "det_order": d.det_order}))
    return Verdict.all_of("local structure", kids), {"points": out}


def _db_check(ctx):
    A, n = ctx.matrix(ctx.args.obj, ctx.args.n)
    d = debranges.db_check(A, n, ctx.tol)
    lem = debranges.lemma51_check(A, n, ctx.grid, ctx.tol)
    head = d.certificates if isinstance(d, debranges.DBMatrix) else d
    res = {"Phi": d.Phi} if isinstance(d, debranges.DBMatrix) else {}
    return Verdict.all_of("de Branges matrix check", [head, lem]), res


def _require_db(A, n, tol):
    d = debranges.db_check(A, n, tol)
    if not isinstance(d, debranges.DBMatrix):
        return None, d
    return d, None


def _db_decompose(ctx):
    A, n = ctx.matrix(ctx.args.obj, ctx.args.n)
    d, bad = _require_db(A, n, ctx.tol)
    if d is None:
        return bad, {}
    S, tilde, pair, v = debranges.db_decompose(d, ctx.args.method)
    res = {"S": S, "E_minus": pair.E_minus, "E_plus": pair.E_plus, "Phi": d.Phi}
    try:
        hint = pair.E_plus.det().num
        params = parametrize.extract_PQ(d.Phi, hint=hint if hint.exact else None,
                                        tol=ctx.tol)
        res.update({"P": params.P, "Q": params.Q, "density": params.density})
        kids = [v, Verdict(True, "Herglotz data")]
    except RationalError as err:
        kids = [v, Verdict(False, "Herglotz data", {"error": str(err)})]
    return Verdict.all_of("decomposition", kids), res


def _db_construct(ctx):
    a = ctx.args
    pair = ctx.pair(a.pair)
    S = ctx.rat(a.assoc)
    n = pair.n
    d = parametrize.construct_db(pair, S, ctx.const(a.P, n), ctx.const(a.Q, n),
                                 ctx.grid, ctx.tol)
    return d.certificates, {"A": d.A, "Phi": d.Phi}


def _kernel(ctx):
    a = ctx.args
    pair = ctx.pair(a.pair)
    w = _complex(a.w)
    if a.z is not None:
        return Verdict(True, "kernel"), {"K": debranges.kernel_eval(pair, w, _complex(a.z))}
    return Verdict(True, "kernel"), {"K_w": debranges.kernel_function(pair, w)}


def _gram(ctx):
    pair = ctx.pair(ctx.args.pair)
    rng = np.random.default_rng(ctx.args.seed)
    k, n = ctx.args.count, pair.n
    pts = rng.uniform(-3, 3, k) + 1j * rng.uniform(-3, 3, k)
    vecs = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
    v = debranges.gram_psd(pair, list(pts), list(vecs), ctx.tol)
    return v, {"points": pts}


def _inner_product(ctx):
    a = ctx.args
    pair = ctx.pair(a.pair)
    f, g = ctx.rat(a.f), ctx.rat(a.g)
    vf = debranges.space_membership(pair, f)
    vf.name = "f in space"
    vg = debranges.space_membership(pair, g)
    vg.name = "g in space"
    head = Verdict.all_of("inner product", [vf, vg])
    if not head.member:
        return head, {}
    res = {"value": debranges.inner_product(pair, f, g)}
    c = debranges.inner_product_coeff(pair, f, g)
    if c is not None:
        res["value_over_pi"] = c
    return head, res


def _assoc(ctx):
    pair = ctx.pair(ctx.args.pair)
    return debranges.assoc_check(pair, ctx.rat(ctx.args.assoc)), {}


def _charfn(ctx):
    a = ctx.args
    if a.op:
        op = ctx.get(a.op)
        if not isinstance(op, debranges.K0Operator):
            raise CliError(f"object {a.op!r} is not a k0_operator")
    else:
        op = gen_k0(a.seed, a.dim, a.n)
    W, op = debranges.char_fn(op, tol=ctx.tol)
    n = op.n
    d = debranges.db_check(W, n, ctx.tol)
    lem = debranges.lemma51_check(W, n, ctx.grid, ctx.tol)
    return Verdict.all_of("characteristic function", [d.certificates, lem]), {
        "operator": op, "W": W, "Phi": d.Phi}


def _verify(ctx):
    A, n = ctx.matrix(ctx.args.obj, ctx.args.n)
    d, bad = _require_db(A, n, ctx.tol)
    if d is None:
        return Verdict.all_of("identity suite", [bad]), {}
    kids = [d.certificates, parametrize.sharp_inverse_identity(A, n, ctx.tol)]
    try:
        parametrize.phi_of(A, n, tol=ctx.tol)
        kids.append(Verdict(True, "Phi forms agree"))
    except RationalError as err:
        kids.append(Verdict(False, "Phi forms agree", {"error": str(err)}))
    S, _, pair, vd = debranges.db_decompose(d)
    kids.append(vd)
    kids.append(parametrize.realpart_identities(pair, S, d.Phi, A=A, grid=ctx.grid,
                                                tol=ctx.tol))
    kids.append(parametrize.verify_pg_blocks(A, n, ctx.grid, ctx.tol))
    res = {"Phi": d.Phi, "S": S, "E_minus": pair.E_minus, "E_plus": pair.E_plus}
    try:
        params = parametrize.extract_PQ(d.Phi, hint=pair.E_plus.det().num, tol=ctx.tol)
        res.update({"P": params.P, "Q": params.Q})
        B = parametrize.construct_db(pair, S, params.P, params.Q, ctx.grid, ctx.tol)
        same = B.A == A if A.exact else B.A.equals(A, 1e-7)
        kids.append(Verdict(same, "construct(decompose(A)) = A",
                            {} if same else {"residual": A.residual(B.A)}))
    except (RationalError, ValueError, debranges.InternalInvariantError) as err:
        kids.append(Verdict(False, "construct(decompose(A)) = A", {"error": str(err)}))
    return Verdict.all_of("identity suite", kids), res


def _uniq(ctx):
    A, n = ctx.matrix(ctx.args.a, ctx.args.n)
    B, _ = ctx.matrix(ctx.args.b, n)
    L, v = parametrize.uniqueness_check(A, B, n, ctx.tol)
    return v, ({"L": L} if L is not None else {})


COMMANDS = {
    "classify": _classify, "pg": _pg, "factor": _factor, "cofactor": _cofactor,
    "local": _local, "db-check": _db_check, "db-decompose": _db_decompose,
    "db-construct": _db_construct, "kernel": _kernel, "gram": _gram,
    "inner-product": _inner_product, "assoc-check": _assoc, "charfn": _charfn,
    "verify": _verify, "uniq": _uniq,
}


# -------------
# Reports
# -------------

def _report(argv, ctx, verdict, result, elapsed):
    rep = {"command": list(argv),
           "config": {"tol": ctx.tol, "mode": ctx.mode, "grid": ctx.args.grid or "default",
                      "seed": ctx.args.seed},
           "verdict": verdict.to_dict(),
           "result": jsonable(result)}
    if elapsed is not None:
        rep["timing"] = {"seconds": round(elapsed, 6)}
    return rep


def _render_text(rep, verdict):
    lines = ["dbmat " + " ".join(rep["command"]),
             "config: " + ", ".join(f"{k}={v}" for k, v in sorted(rep["config"].items())),
             verdict.render()]
    for k, v in sorted(rep["result"].items()):
        lines.append(f"{k}: {json.dumps(v, sort_keys=True)}")
    if "timing" in rep:
        lines.append(f"time: {rep['timing']['seconds']:.3f} s")
    return "\n".join(lines) + "\n"


def run(argv):
    """Run a command; return (exit code, report text)."""
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        ctx = Ctx(args)
        verdict, result = COMMANDS[args.command](ctx)
    except (CliError, ModelError, RationalError, SamplingError, ValueError,
            debranges.K0Error, debranges.InternalInvariantError, TypeError,
            OSError) as err:
        rep = {"command": list(argv), "error": f"{type(err).__name__}: {err}"}
        witness = getattr(err, "witness", None)
        if witness:
            rep["witness"] = jsonable(witness)
        return 2, json.dumps(rep, sort_keys=True, indent=2) + "\n"
    elapsed = time.perf_counter() - t0 if args.timing else None
    rep = _report(argv, ctx, verdict, result, elapsed)
    if args.format == "json":
        text = json.dumps(rep, sort_keys=True, indent=2) + "\n"
    else:
        text = _render_text(rep, verdict)
    return (0 if verdict.member else 1), text


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    code, text = run(argv)
    out = None
    try:
        out = build_parser().parse_args(argv).out
    except SystemExit:
        pass
    if out and code != 2:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (sys.stderr if code == 2 else sys.stdout).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
