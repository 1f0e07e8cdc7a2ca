"""Command-line client for the solver service.

Commands run in process by default, calling the same handler functions the
HTTP service exposes; pass --url to talk to a running server instead.  A
key = value config file can preload any flag; explicit flags win.
"""

from __future__ import annotations

import click
import httpx
from click.core import ParameterSource
from pydantic import ValidationError

from . import __version__
from .bench import (
    DEFAULT_SIZES,
    _fmt,
    format_csv,
    format_omega_csv,
    parse_arithmetic,
    parse_sizes,
    write_csv,
    write_omega_csv,
)
from .service import schemas
from .service.app import handle_bench, handle_cycles, handle_omega_sweep, handle_solve

_LOCAL_HANDLERS = {
    "/solve": handle_solve,
    "/bench": handle_bench,
    "/omega-sweep": handle_omega_sweep,
    "/cycles": handle_cycles,
}


def load_config_file(path: str) -> dict[str, str]:
    """Read a key = value file; '#' starts a comment, hyphens match underscores."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.UsageError(f"{path}:{ln}: expected key = value")
            key, _, val = line.partition("=")
            out[key.strip().replace("-", "_")] = val.strip()
    return out


def _config_overrides(ctx: click.Context, config_path: str | None, coercers: dict) -> dict:
    if not config_path:
        return {}
    out: dict = {}
    for key, text in load_config_file(config_path).items():
        if key not in coercers:
            raise click.UsageError(f"unknown config key {key!r} in {config_path}")
        if ctx.get_parameter_source(key) == ParameterSource.COMMANDLINE:
            continue
        try:
            out[key] = coercers[key](text)
        except ValueError as exc:
            raise click.UsageError(f"bad value for {key!r} in {config_path}: {exc}")
    return out


def _request(model, **kwargs):
    try:
        return model(**kwargs)
    except ValidationError as exc:
        raise click.UsageError(str(exc)) from None


def _dispatch(ctx: click.Context, path: str, request, response_model):
    url = (ctx.obj or {}).get("url")
    if url is None:
        return _LOCAL_HANDLERS[path](request)
    resp = httpx.post(url.rstrip("/") + path, json=request.model_dump(), timeout=None)
    if resp.status_code != 200:
        raise click.ClickException(f"service returned {resp.status_code}: {resp.text[:500]}")
    return response_model.model_validate(resp.json())


def _check_arith(ctx, param, value):
    try:
        parse_arithmetic(value)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    return value


def _parse_omega_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            w = float(parts[0])
            return (w, w, 1.0)
        if len(parts) == 3:
            return (float(parts[0]), float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise ValueError(f"expected a single omega or start:stop:step, got {text!r}")


@click.group()
@click.version_option(version=__version__, prog_name="sorkit")
@click.option("--url", default=None, metavar="URL", help="Base URL of a running service; omit to run in process.")
@click.pass_context
def main(ctx: click.Context, url: str | None) -> None:
    """SOR solvers for 2D Poisson problems with a hardware cycle model."""
    ctx.obj = {"url": url}


_TOL_HELP = "Relative residual target (default 1e-8 for float, 1e-3 for fixed)."
_ARITH_HELP = "Arithmetic: 'float' or 'fixed:<frac_bits>'."


@main.command()
@click.option("--size", type=int, default=32, show_default=True, help="Interior grid points per side.")
@click.option("--omega", type=float, default=1.5, show_default=True, help="Relaxation factor.")
@click.option("--tol", type=float, default=None, help=_TOL_HELP)
@click.option("--max-sweeps", type=int, default=50_000, show_default=True)
@click.option("--ordering", type=click.Choice(["lex", "rb"]), default="lex", show_default=True)
@click.option("--arith", default="float", show_default=True, callback=_check_arith, help=_ARITH_HELP)
@click.option("--seed", type=int, default=None, help="Seed for a random initial guess; omit for zeros.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def solve(ctx, size, omega, tol, max_sweeps, ordering, arith, seed, config_path):
    """Solve the built-in manufactured Poisson problem at one size."""
    values = dict(size=size, omega=omega, tol=tol, max_sweeps=max_sweeps,
                  ordering=ordering, arith=arith, seed=seed)
    values.update(_config_overrides(ctx, config_path, {
        "size": int, "omega": float, "tol": float, "max_sweeps": int,
        "ordering": str, "arith": str, "seed": int,
    }))
    req = _request(
        schemas.SolveRequest,
        size=values["size"], omega=values["omega"], tol=values["tol"],
        max_sweeps=values["max_sweeps"], ordering=values["ordering"],
        arithmetic=values["arith"], seed=values["seed"],
    )
    resp = _dispatch(ctx, "/solve", req, schemas.SolveResponse)
    for key in ("size", "omega", "arithmetic", "ordering", "tol", "iterations",
                "final_residual", "converged", "diverged", "wall_time_s", "error_vs_exact"):
        click.echo(f"{key}={_fmt(getattr(resp, key))}")
    if not resp.converged:
        ctx.exit(1)


@main.command()
@click.option("--size", "sizes", type=int, multiple=True,
              help="Grid size; repeatable. Default ladder: " + ",".join(map(str, DEFAULT_SIZES)))
@click.option("--omega", type=float, default=1.5, show_default=True)
@click.option("--tol", type=float, default=None, help=_TOL_HELP)
@click.option("--max-sweeps", type=int, default=50_000, show_default=True)
@click.option("--ordering", type=click.Choice(["lex", "rb"]), default="lex", show_default=True)
@click.option("--arith", default="float", show_default=True, callback=_check_arith, help=_ARITH_HELP)
@click.option("--freq-hz", type=float, default=100e6, show_default=True, help="Model clock frequency.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--assigns-per-update", type=int, default=6, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the rows to a CSV file.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def bench(ctx, sizes, omega, tol, max_sweeps, ordering, arith, freq_hz, seed,
          assigns_per_update, out, config_path):
    """Time solves across grid sizes and price both hardware schedules.

    Prints the CSV to stdout.  Exit status is nonzero when any size
    diverged or hit the sweep cap.
    """
    values = dict(size=tuple(sizes), omega=omega, tol=tol, max_sweeps=max_sweeps,
                  ordering=ordering, arith=arith, freq_hz=freq_hz, seed=seed,
                  assigns_per_update=assigns_per_update, out=out)
    values.update(_config_overrides(ctx, config_path, {
        "size": parse_sizes, "omega": float, "tol": float, "max_sweeps": int,
        "ordering": str, "arith": str, "freq_hz": float, "seed": int,
        "assigns_per_update": int, "out": str,
    }))
    req = _request(
        schemas.BenchRequest,
        sizes=list(values["size"] or DEFAULT_SIZES), omega=values["omega"],
        tol=values["tol"], max_sweeps=values["max_sweeps"], ordering=values["ordering"],
        arithmetic=values["arith"], freq_hz=values["freq_hz"], seed=values["seed"],
        assigns_per_update=values["assigns_per_update"],
    )
    resp = _dispatch(ctx, "/bench", req, schemas.BenchResponse)
    click.echo(format_csv(resp.rows), nl=False)
    if values["out"]:
        write_csv(resp.rows, values["out"])
    if not resp.all_converged:
        ctx.exit(1)


@main.command("omega-sweep")
@click.option("--size", type=int, default=64, show_default=True)
@click.option("--omega", "omega_text", default="1.0:1.95:0.05", show_default=True,
              metavar="START:STOP:STEP", help="Omega grid to sweep (0 < omega < 2).")
@click.option("--tol", type=float, default=None, help=_TOL_HELP)
@click.option("--max-sweeps", type=int, default=50_000, show_default=True)
@click.option("--ordering", type=click.Choice(["lex", "rb"]), default="lex", show_default=True)
@click.option("--arith", default="float", show_default=True, callback=_check_arith, help=_ARITH_HELP)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Also write the rows to a CSV file.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def omega_sweep(ctx, size, omega_text, tol, max_sweeps, ordering, arith, seed, out, config_path):
    """Compare iteration counts over a grid of relaxation factors.

    Every omega starts from the same seeded initial guess; the converged
    row with the fewest sweeps is marked as the minimizer.
    """
    values = dict(size=size, omega=omega_text, tol=tol, max_sweeps=max_sweeps,
                  ordering=ordering, arith=arith, seed=seed, out=out)
    values.update(_config_overrides(ctx, config_path, {
        "size": int, "omega": str, "tol": float, "max_sweeps": int,
        "ordering": str, "arith": str, "seed": int, "out": str,
    }))
    try:
        start, stop, step = _parse_omega_range(values["omega"])
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--omega") from None
    req = _request(
        schemas.OmegaSweepRequest,
        size=values["size"], start=start, stop=stop, step=step, tol=values["tol"],
        max_sweeps=values["max_sweeps"], ordering=values["ordering"],
        arithmetic=values["arith"], seed=values["seed"],
    )
    resp = _dispatch(ctx, "/omega-sweep", req, schemas.OmegaSweepResponse)
    click.echo(format_omega_csv(resp.rows), nl=False)
    if resp.minimizer is not None:
        click.echo(f"minimizer omega={_fmt(resp.minimizer)}", err=True)
    if values["out"]:
        write_omega_csv(resp.rows, values["out"])
    if not all(r.converged for r in resp.rows):
        ctx.exit(1)


@main.command("cycles")
@click.option("--size", type=int, default=32, show_default=True)
@click.option("--sweeps", type=int, default=1, show_default=True)
@click.option("--assigns-per-update", type=int, default=6, show_default=True)
@click.option("--freq-hz", type=float, default=100e6, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.pass_context
def cycles_cmd(ctx, size, sweeps, assigns_per_update, freq_hz, config_path):
    """Cycle counts and modelled times for both schedules."""
    values = dict(size=size, sweeps=sweeps, assigns_per_update=assigns_per_update, freq_hz=freq_hz)
    values.update(_config_overrides(ctx, config_path, {
        "size": int, "sweeps": int, "assigns_per_update": int, "freq_hz": float,
    }))
    req = _request(schemas.CyclesRequest, **values)
    resp = _dispatch(ctx, "/cycles", req, schemas.CyclesResponse)
    for key in ("size", "sweeps", "assigns_per_update", "freq_hz", "cycles_sequential",
                "cycles_red_black", "speedup", "time_sequential_s", "time_red_black_s"):
        click.echo(f"{key}={_fmt(getattr(resp, key))}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service under uvicorn."""
    import uvicorn

    uvicorn.run("sorkit.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
