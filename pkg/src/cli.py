import logging
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional

import typer

try:  # typer>=0.26 vendors click and raises its own exception classes
    from typer import _click as click
except ImportError:
    import click

from . import settings
from .services import obstruction, parsing
from .services.finite_field import PrimeField
from .services.patch_graph import build_graph, graph_summary, random_tree, recompose_edges, tree_factorize
from .services.reports import Report, ShaReport, Status
from .services.series_local import (
    BaseKind,
    CyclicKummerLocal,
    hensel_nth_root,
    is_norm_cyclic,
    local_invariants,
    tame_symbol,
)
from .services.two_local import (
    KummerTower,
    MonomialKummer,
    NormDescent,
    kummer_decompose,
    norm_descent_2dim,
    ramification_after_root,
    ramification_descent,
)
from .utils.errors import ShaError, VerificationMismatch

app = typer.Typer(
    help="Local-global obstructions for norm-one tori over semiglobal fields, in exact arithmetic.",
    no_args_is_help=True,
)
verify_app = typer.Typer(help="Re-run the worked counterexamples end to end.", no_args_is_help=True)
app.add_typer(verify_app, name="verify-paper")


@dataclass
class CliState:
    json_output: bool = False
    seed: int = settings.SHA_SEED
    precision: int = settings.SHA_PRECISION


@app.callback()
def main_options(
    ctx: typer.Context,
    json_output: bool = typer.Option(False, "--json", help="Print the report as JSON."),
    verbose: bool = typer.Option(False, "--verbose", help="Log algorithm steps at DEBUG level."),
    seed: int = typer.Option(settings.SHA_SEED, "--seed", help="Seed for randomized scenarios."),
    precision: int = typer.Option(
        settings.SHA_PRECISION, "--prec", min=1, help="Working precision in terms for every series computation."
    ),
):
    logging.basicConfig(level=logging.DEBUG if verbose else settings.SHA_LOG_LEVEL)
    ctx.obj = CliState(json_output=json_output, seed=seed, precision=precision)


def _state(ctx: typer.Context) -> CliState:
    return ctx.find_object(CliState) or CliState()


def _execute(ctx: typer.Context, command: str, action: Callable[[], Report], text: Optional[Callable] = None):
    """Run one command, print its report and map library errors to exit codes."""
    state = _state(ctx)
    try:
        report = action()
    except ShaError as exc:
        status = Status.MISMATCH if isinstance(exc, VerificationMismatch) else Status.ERROR
        failed = Report(command=command, status=status, payload=exc.payload)
        if state.json_output:
            typer.echo(failed.to_json())
        else:
            typer.secho(f"{command}: {exc.payload['code']}: {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=exc.exit_code)
    except ValueError as exc:
        failed = Report(command=command, status=Status.ERROR, payload={"code": "INVALID_INPUT", "message": str(exc)})
        if state.json_output:
            typer.echo(failed.to_json())
        else:
            typer.secho(f"{command}: {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=1)

    if state.json_output:
        typer.echo(report.to_json())
    elif text is not None:
        typer.echo(text(report))
    else:
        typer.echo(report.render())


def _sha_report(command: str, report: ShaReport, **extra) -> Report:
    status = Status.OK if report.feasible else Status.INFEASIBLE
    return Report(command=command, status=status, payload={"sha": report.model_dump(mode="json"), **extra})


# ---------------------------------------------------------------------------
# Local computations
# ---------------------------------------------------------------------------


@app.command("ramify")
def ramify(
    ctx: typer.Context,
    e: int = typer.Option(..., "--e", help="Ramification index of the base valuation."),
    ell: int = typer.Option(..., "--ell", help="Prime degree of the root extension."),
):
    """Ramification index after adjoining an ell-th root of a uniformizer power."""

    def action() -> Report:
        return Report(
            command="ramify",
            payload={"e": e, "ell": ell, "result": ramification_after_root(e, ell), "descent": ramification_descent(e)},
        )

    _execute(ctx, "ramify", action, text=lambda report: str(report.payload["result"]))


@app.command("local-norm")
def local_norm(
    ctx: typer.Context,
    q: int = typer.Option(..., "--q", help="Residue characteristic."),
    n: int = typer.Option(..., "--n", help="Degree of the cyclic extension."),
    radicand: str = typer.Option(..., "--radicand", help="Series a with L = F(a^(1/n)), e.g. 't + 1'."),
    lam: str = typer.Option(..., "--lam", help="Series to test for being a norm from L."),
    prec: Optional[int] = typer.Option(None, "--prec", min=1, help="Working precision; overrides the global --prec."),
):
    """Decide whether lam is a norm from F(a^(1/n)) over F_q((t))."""

    def action() -> Report:
        field = PrimeField(q)
        precision = prec or _state(ctx).precision
        a = parsing.parse_series(radicand, field, precision)
        target = parsing.parse_series(lam, field, precision)
        ext = CyclicKummerLocal(a, n, field)
        e, f, degree = local_invariants(ext)
        return Report(
            command="local-norm",
            payload={
                "radicand": a.to_literal(),
                "lam": target.to_literal(),
                "is_norm": is_norm_cyclic(ext, target),
                "tame_symbol": tame_symbol(a, target, n),
                "ramification": e,
                "residue_degree": f,
                "degree": degree,
            },
        )

    _execute(ctx, "local-norm", action)


@app.command("local-hensel")
def local_hensel(
    ctx: typer.Context,
    q: int = typer.Option(..., "--q", help="Residue characteristic."),
    n: int = typer.Option(..., "--n", help="Root degree, prime to q."),
    z: str = typer.Option(..., "--z", help="Unit series with constant term 1."),
    prec: Optional[int] = typer.Option(None, "--prec", min=1, help="Working precision; overrides the global --prec."),
):
    """The n-th root of z that reduces to 1."""

    def action() -> Report:
        field = PrimeField(q)
        precision = prec or _state(ctx).precision
        series = parsing.parse_series(z, field, precision)
        root = hensel_nth_root(series, n)
        return Report(
            command="local-hensel",
            payload={"z": series.to_literal(), "n": n, "root": root.to_literal(), "precision": root.precision},
        )

    _execute(ctx, "local-hensel", action)


def _tower_payload(tower: KummerTower) -> dict:
    return {
        "degree": tower.degree,
        "l1_degree": tower.l1_degree,
        "d1": tower.d1,
        "d2": tower.d2,
        "i_exp": tower.i_exp,
        "radicands": {name: x.to_literal() for name, x in tower.radicands()},
        "combinations": {name: list(c) for name, c in tower.combinations.items()},
    }


def _descent_payload(descent: NormDescent) -> dict:
    return {
        "is_norm": descent.is_norm,
        "degree": descent.degree,
        "trail": [
            {
                "level": step.level,
                "radicand": step.radicand.to_literal() if step.radicand is not None else None,
                "exponent": step.exponent,
                "norm": step.norm.to_literal(),
            }
            for step in descent.trail
        ],
        "certificate": descent.certificate.to_literal() if descent.certificate is not None else None,
        "obstruction": descent.obstruction,
    }


@app.command("monomial")
def monomial(
    ctx: typer.Context,
    q: int = typer.Option(..., "--q", help="Residue characteristic."),
    n: int = typer.Option(..., "--n", help="Kummer exponent."),
    gens: List[str] = typer.Option(..., "--gens", help="Generator 'u:<int> e1:<int> e2:<int>'; repeat the flag."),
    lam: Optional[str] = typer.Option(None, "--lam", help="Monomial to test for being a norm."),
):
    """Kummer tower of F(n-th roots of monomials) over a 2-dimensional local field."""

    def action() -> Report:
        field = PrimeField(q)
        K = MonomialKummer([parsing.parse_monomial(g, field) for g in gens], n, field)
        payload = {"tower": _tower_payload(kummer_decompose(K))}
        if lam is not None:
            payload["norm"] = _descent_payload(norm_descent_2dim(K, parsing.parse_monomial(lam, field)))
        return Report(command="monomial", payload=payload)

    _execute(ctx, "monomial", action)


# ---------------------------------------------------------------------------
# Patching graphs
# ---------------------------------------------------------------------------


@app.command("graph-check")
def graph_check(
    ctx: typer.Context,
    model: Path = typer.Argument(..., help="Model JSON: components, points and optional edge_moduli."),
):
    """Vertex and edge counts, tree test and Betti number of the patch graph."""

    def action() -> Report:
        return Report(command="graph-check", payload=graph_summary(build_graph(parsing.parse_model(model))))

    _execute(ctx, "graph-check", action)


@app.command("graph-factorize")
def graph_factorize(
    ctx: typer.Context,
    model: Path = typer.Argument(..., help="Model JSON whose patch graph is a tree."),
    values: Path = typer.Option(..., "--values", help='JSON {"edges": {"P:U": value}}.'),
    group: Optional[str] = typer.Option(None, "--group", help="zmod:<m> or sym:<k>; a bare size uses SHA_DEFAULT_GROUP."),
):
    """Factor branch values as g_P * g_U along a tree."""

    def action() -> Report:
        graph = build_graph(parsing.parse_model(model))
        spec = parsing.parse_group(group, default_size=2)
        edge_values = parsing.parse_values(values, graph, spec)
        vertex_values = tree_factorize(graph, edge_values, spec)
        if recompose_edges(graph, vertex_values, spec) != edge_values:
            raise VerificationMismatch("Vertex values do not recompose the branch values.")
        return Report(
            command="graph-factorize",
            payload={"group": str(spec), "vertices": {v: spec.serialize(x) for v, x in vertex_values.items()}},
        )

    _execute(ctx, "graph-factorize", action)


@app.command("sha")
def sha(
    ctx: typer.Context,
    model: Path = typer.Argument(..., help="Model JSON."),
    target: Optional[Path] = typer.Option(None, "--target", help='Target JSON {"edges": {"P:U": k}}; default 0.'),
    n: int = typer.Option(2, "--n", min=1, help="Order of rho."),
    check: bool = typer.Option(False, "--check", help="Cross-check against brute-force enumeration."),
):
    """Cokernel of the patching product map and membership of a target."""

    def action() -> Report:
        problem = obstruction.problem_from_model(parsing.parse_model(model), n)
        vector = parsing.parse_target(target, problem.graph) if target else [0] * len(problem.graph.branches)
        report = obstruction.in_image(problem, vector)
        extra = {}
        if check:
            image = obstruction.enumerate_image(problem)
            cokernel = 1
            for d in report.invariant_factors:
                cokernel *= d
            member = tuple(report.target) in image
            if member != report.feasible or len(image) * cokernel != obstruction.edge_group_order(problem):
                raise VerificationMismatch(
                    "Enumeration disagrees with the Smith normal form.",
                    image_size=len(image),
                    invariant_factors=report.invariant_factors,
                )
            extra["check"] = {"image_size": len(image), "edge_group_order": obstruction.edge_group_order(problem)}
        return _sha_report("sha", report, **extra)

    _execute(ctx, "sha", action)


# ---------------------------------------------------------------------------
# Worked counterexamples
# ---------------------------------------------------------------------------


@verify_app.command("triangle")
def verify_triangle(
    ctx: typer.Context,
    n: int = typer.Option(..., "--n", help="Degree n; q must be 1 mod n^2."),
    q: int = typer.Option(..., "--q", help="Residue characteristic."),
):
    """Nontrivial Sha for the norm-one torus on the triangle model."""
    precision = _state(ctx).precision
    _execute(
        ctx,
        "verify-paper triangle",
        lambda: _sha_report("verify-paper triangle", obstruction.verify_triangle(n, q, precision)),
    )


@verify_app.command("multinorm")
def verify_multinorm(
    ctx: typer.Context,
    n: int = typer.Option(..., "--n", help="Degree n; 6n must be prime to q."),
    q: int = typer.Option(..., "--q", help="Residue characteristic."),
):
    """Nontrivial Sha for the multinorm torus of two biquadratic-type extensions."""
    precision = _state(ctx).precision
    _execute(
        ctx,
        "verify-paper multinorm",
        lambda: _sha_report("verify-paper multinorm", obstruction.verify_multinorm(n, q, precision)),
    )


@verify_app.command("trees")
def verify_trees(
    ctx: typer.Context,
    count: int = typer.Option(200, "--count", min=1, help="Number of random trees."),
    max_vertices: int = typer.Option(20, "--max-vertices", min=1, help="Largest tree size."),
):
    """Every target is reached on random trees, so Sha vanishes there."""

    def action() -> Report:
        seed = _state(ctx).seed
        rng = random.Random(seed)
        for index in range(count):
            graph = random_tree(rng, max_vertices)
            n = rng.choice([2, 3, 4])
            problem = obstruction.ObstructionProblem(graph, n)
            target = [rng.randrange(n) for _ in graph.branches]
            report = obstruction.in_image(problem, target)
            if not report.feasible or report.invariant_factors:
                raise VerificationMismatch(f"Random tree {index} has an obstruction.", index=index, seed=seed)
        return Report(command="verify-paper trees", payload={"seed": seed, "count": count, "max_vertices": max_vertices})

    _execute(ctx, "verify-paper trees", action)


@verify_app.command("local-trees")
def verify_local_trees(
    ctx: typer.Context,
    base: BaseKind = typer.Option(BaseKind.FINITE, "--base", help="Residue field of the closed points."),
    n: int = typer.Option(2, "--n", min=1, help="Degree of the cyclic extension."),
    q: Optional[int] = typer.Option(None, "--q", help="Residue characteristic for a finite base; q = 1 mod n."),
    count: int = typer.Option(50, "--count", min=1, help="Number of random trees."),
    max_vertices: int = typer.Option(12, "--max-vertices", min=1, help="Largest tree size."),
):
    """Trees of patches with random residue towers on every branch have trivial Sha."""

    def action() -> Report:
        seed = _state(ctx).seed
        if base == BaseKind.FINITE and q is None:
            raise ValueError("A finite base needs --q.")
        summary = obstruction.verify_local_trees(base, n, q, count, max_vertices, random.Random(seed))
        return Report(command="verify-paper local-trees", payload={"seed": seed, **summary})

    _execute(ctx, "verify-paper local-trees", action)


def run(argv: Optional[List[str]] = None) -> int:
    """Invoke the app without exiting; usage errors map to exit code 1."""
    try:
        result = app(args=argv, prog_name="sha-patching", standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    return result if isinstance(result, int) else 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
