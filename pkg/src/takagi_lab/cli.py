"""Command-line surface.

Every subcommand is scriptable: seeded runs are reproducible byte-for-byte,
numbers are printed with full round-trip precision, CSV uses ',' and '.'
with no locale dependence, and all file output is UTF-8.

Exit codes: 0 success, 1 computation guard violation, 2 usage error.
"""

from __future__ import annotations

import io
import json
import sys
from fractions import Fraction
from functools import wraps

import click

from . import bernoulli, dyadic, extremal, variation
from .coeffs import ALL_PLUS, HALF_NEGATED, Seeded, load_explicit
from .errors import TakagiLabError
from .tl_function import Hurst, SignedTLFunction, evaluate_with_level

SOURCES = ("all-plus", "half-negated", "seeded", "explicit")


class RationalParam(click.ParamType):
    """Accepts 'a/b' or decimal strings; both parse to exact rationals."""

    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a rational number", param, ctx)


class HurstParam(click.ParamType):
    name = "hurst"

    def convert(self, value, param, ctx):
        if isinstance(value, Hurst):
            return value
        try:
            return Hurst.parse(str(value))
        except (ValueError, ZeroDivisionError) as exc:
            self.fail(str(exc), param, ctx)


RATIONAL = RationalParam()
HURST = HurstParam()


def guarded(fn):
    """Map library guard violations to exit code 1."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except TakagiLabError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def source_options(fn):
    fn = click.option("--coeffs", type=click.Choice(SOURCES), default="all-plus",
                      show_default=True, help="Sign source.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Seed for the seeded source.")(fn)
    fn = click.option("--explicit-file", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="JSON sign rows for the explicit source.")(fn)
    return fn


def make_source(coeffs: str, seed: int, explicit_file):
    if coeffs == "all-plus":
        return ALL_PLUS
    if coeffs == "half-negated":
        return HALF_NEGATED
    if coeffs == "seeded":
        return Seeded(seed)
    if explicit_file is None:
        raise click.UsageError("--coeffs explicit requires --explicit-file")
    return load_explicit(explicit_file)


def emit(text: str, output) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(text)


def emit_bytes(data: bytes, output) -> None:
    if output is None:
        sys.stdout.buffer.write(data)
    else:
        with open(output, "wb") as f:
            f.write(data)


def json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


@click.group()
@click.version_option(package_name="takagi-lab")
def main() -> None:
    """Signed Takagi-Landsberg functions: evaluation, dyadic grids, p-th
    variation, Bernoulli-convolution moments, extremes, and modulus of
    continuity."""


@main.command("eval")
@click.option("--H", "hurst", type=HURST, required=True, help="Hurst index in (0,1).")
@source_options
@click.option("--t", "t", type=RATIONAL, required=True, help="Point in [0,1].")
@click.option("--eps", type=float, default=1e-10, show_default=True,
              help="Absolute accuracy of the evaluation.")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]),
              default="text", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_eval(hurst, coeffs, seed, explicit_file, t, eps, fmt, output):
    """Evaluate the function at a point to within --eps."""
    if eps <= 0:
        raise click.UsageError("--eps must be > 0")
    if not 0 <= t <= 1:
        raise click.UsageError("--t must lie in [0, 1]")
    x = SignedTLFunction(hurst, make_source(coeffs, seed, explicit_file))
    value, level = evaluate_with_level(x, t, eps)
    if fmt == "json":
        emit(json_text({"H": hurst.value, "t": str(t), "eps": eps,
                        "value": value, "level": level}), output)
    elif fmt == "csv":
        emit(f"value,level\n{value!r},{level}\n", output)
    else:
        emit(f"{value!r}\nlevel {level}\n", output)


def _level_guard(n: int, max_level: int, streaming: bool) -> None:
    if max_level > dyadic.HARD_MAX_LEVEL:
        raise click.UsageError(f"--max-level cannot exceed {dyadic.HARD_MAX_LEVEL}")
    if n > max_level:
        hint = (" (raise --max-level and pass --streaming)"
                if n > dyadic.DENSE_MAX_LEVEL else " (raise --max-level)")
        raise TakagiLabError(f"level {n} exceeds --max-level {max_level}{hint}")
    if n > dyadic.DENSE_MAX_LEVEL and not streaming:
        raise TakagiLabError(
            f"level {n} exceeds the dense guard {dyadic.DENSE_MAX_LEVEL}; "
            "pass --streaming to process it in chunks"
        )


@main.command("grid")
@click.option("--H", "hurst", type=HURST, required=True)
@source_options
@click.option("--level", "n", type=int, required=True, help="Dyadic level n.")
@click.option("--what", type=click.Choice(["values", "increments"]),
              default="values", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "raw"]),
              default="csv", show_default=True)
@click.option("--max-level", type=int, default=dyadic.DENSE_MAX_LEVEL, show_default=True)
@click.option("--streaming", is_flag=True, help="Allow levels beyond the dense guard.")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_grid(hurst, coeffs, seed, explicit_file, n, what, fmt, max_level,
             streaming, output):
    """Exact grid values or increments at a dyadic level."""
    _level_guard(n, max_level, streaming)
    x = SignedTLFunction(hurst, make_source(coeffs, seed, explicit_file))
    if fmt == "raw":
        buf = io.BytesIO()
        dyadic.write_raw(buf, x, n, what=what, max_level=max_level)
        emit_bytes(buf.getvalue(), output)
        return
    if fmt == "json":
        chunks = (dyadic.iter_value_chunks if what == "values"
                  else dyadic.iter_increment_chunks)(x, n, max_level=max_level)
        data = [float(v) for chunk in chunks for v in chunk]
        emit(json_text({"H": hurst.value, "n": n, "what": what, "data": data}),
             output)
        return
    buf = io.StringIO()
    writer = (dyadic.write_values_csv if what == "values"
              else dyadic.write_increments_csv)
    writer(buf, x, n, max_level=max_level)
    emit(buf.getvalue(), output)


@main.command("variation")
@click.option("--H", "hurst", type=HURST, required=True)
@source_options
@click.option("--p", "p", type=RATIONAL, required=True, help="Variation exponent.")
@click.option("--t", "t", type=RATIONAL, default=Fraction(1), show_default="1",
              help="Right end of the summation window.")
@click.option("--n-max", type=int, required=True, help="Deepest level tabulated.")
@click.option("--max-level", type=int, default=dyadic.DENSE_MAX_LEVEL, show_default=True)
@click.option("--streaming", is_flag=True)
@click.option("--threads", type=int, default=1, show_default=True,
              envvar="TAKAGI_LAB_THREADS")
@click.option("--mc-samples", type=int, default=10 ** 6, show_default=True,
              help="Monte Carlo sample count for non-closed-form slopes.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_variation(hurst, coeffs, seed, explicit_file, p, t, n_max, max_level,
                  streaming, threads, mc_samples, fmt, output):
    """Tabulate V_n, classify the regime, and attach the predicted limit."""
    if p < 0:
        raise click.UsageError("--p must be >= 0")
    if not 0 < t <= 1:
        raise click.UsageError("--t must lie in (0, 1]")
    _level_guard(n_max, max_level, streaming)
    x = SignedTLFunction(hurst, make_source(coeffs, seed, explicit_file))
    report = variation.convergence_report(
        x, p, t, n_max, max_level=max_level, threads=threads,
        samples=mc_samples, seed=seed,
    )
    if fmt == "json":
        emit(json_text(variation.report_json_dict(report)), output)
    else:
        buf = io.StringIO()
        variation.write_report_csv(buf, report)
        emit(buf.getvalue(), output)


@main.command("slope")
@click.option("--H", "hurst", type=HURST, default=None,
              help="Single Hurst index (omit when sweeping).")
@click.option("--sweep", type=int, default=None,
              help="Emit the slope curve on an N-point interior grid of H.")
@click.option("--samples", type=int, default=10 ** 6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--truncation", type=int, default=64, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_slope(hurst, sweep, samples, seed, truncation, fmt, output):
    """Predicted variation slope 2**(1-1/H) E[|Z|**(1/H)]: one H or a sweep."""
    if (hurst is None) == (sweep is None):
        raise click.UsageError("pass exactly one of --H or --sweep")
    if sweep is not None:
        curve = variation.slope_curve(sweep, samples=samples, seed=seed,
                                      truncation=truncation)
        if fmt == "json":
            rows = [{"H": float(pt.h), "slope": pt.value, "stderr": pt.stderr,
                     "method": pt.method} for pt in curve]
            emit(json_text(rows), output)
        else:
            buf = io.StringIO()
            variation.write_slope_curve_csv(buf, curve)
            emit(buf.getvalue(), output)
        return
    est = variation.predicted_slope(hurst, samples=samples, seed=seed,
                                    truncation=truncation)
    payload = {"H": hurst.value, "slope": est.value, "stderr": est.stderr,
               "method": est.method}
    if fmt == "json":
        emit(json_text(payload), output)
    else:
        se = "" if est.stderr is None else repr(est.stderr)
        emit(f"H,slope,stderr,method\n{hurst.value!r},{est.value!r},{se},{est.method}\n",
             output)


@main.command("moments")
@click.option("--H", "hurst", type=HURST, default=None,
              help="Hurst index; sets lambda = 2**(H-1).")
@click.option("--lam", "--lambda", "lam", type=RATIONAL, default=None,
              help="Convolution parameter in (0,1) as a rational.")
@click.option("--p", "p", type=RATIONAL, required=True, help="Moment order.")
@click.option("--method", type=click.Choice(["recursion", "series", "mc"]),
              default="recursion", show_default=True,
              help="recursion: exact self-similarity; series: Bernoulli-number "
                   "closed form (normalized convolution); mc: Monte Carlo.")
@click.option("--kind", type=click.Choice(["abs", "signed"]), default="abs",
              show_default=True)
@click.option("--samples", type=int, default=10 ** 6, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--truncation", type=int, default=64, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_moments(hurst, lam, p, method, kind, samples, seed, truncation, fmt, output):
    """Moments of the Bernoulli convolution with parameter lambda."""
    if (hurst is None) == (lam is None):
        raise click.UsageError("pass exactly one of --H or --lam")
    if hurst is not None:
        bc = bernoulli.BernoulliConvolution.from_hurst(hurst)
    else:
        if not 0 < lam < 1:
            raise click.UsageError("--lam must lie in (0, 1)")
        bc = bernoulli.BernoulliConvolution(lam)
    payload = {"lambda": float(bc.lam), "p": float(p)}
    extra = {}
    if method == "mc":
        est = bernoulli.sample_abs_moment(bc, float(p), samples, seed=seed,
                                          truncation=truncation)
        value, exact = est.mean, False
        extra = {"stderr": est.stderr, "bias_bound": est.bias_bound,
                 "samples": samples, "truncation": truncation, "seed": seed}
        if kind == "signed":
            raise click.UsageError("--kind signed has no Monte Carlo path")
    else:
        if p.denominator != 1 or p < 0:
            raise click.UsageError(f"--method {method} needs an integer p >= 0")
        pi = int(p)
        if method == "series":
            if hurst is None:
                raise click.UsageError("--method series needs --H")
            value, exact = bernoulli.normalized_even_moment(hurst, pi), False
            extra = {"normalization": "moment of sum (1-lambda) lambda^m Y_m"}
        elif kind == "signed":
            value, exact = float(bernoulli.signed_moment(bc, pi)), True
        else:
            if pi % 2 != 0 or pi == 0:
                raise click.UsageError(
                    "absolute moments of odd/zero order have no closed form; "
                    "use --method mc or --kind signed"
                )
            value, exact = float(bernoulli.even_moment(bc, pi)), True
    payload.update({"value": value, "exact": exact, "method": method, **extra})
    if fmt == "json":
        emit(json_text(payload), output)
    else:
        keys = list(payload)
        row = ",".join(
            repr(payload[k]) if isinstance(payload[k], float) else str(payload[k])
            for k in keys
        )
        emit(",".join(keys) + "\n" + row + "\n", output)


@main.command("extremes")
@click.option("--H", "hurst", type=HURST, required=True)
@click.option("--n-max", type=int, default=0, show_default=True,
              help="Also tabulate truncated maxima up to this level.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_extremes(hurst, n_max, fmt, output):
    """Global maximum, maximizers, uniform oscillation, truncated maxima."""
    mx = extremal.max_value(hurst)
    osc = extremal.uniform_oscillation(hurst)
    if fmt == "csv":
        if n_max < 1:
            raise click.UsageError("--format csv tabulates rows; pass --n-max >= 1")
        buf = io.StringIO()
        extremal.write_truncated_max_csv(buf, hurst, n_max)
        emit(buf.getvalue(), output)
        return
    payload = {
        "H": hurst.value,
        "max": mx.value,
        "maximizers": list(mx.locations),
        "oscillation": osc.value,
        "oscillation_points": [osc.s, osc.t],
    }
    if n_max >= 1:
        payload["truncated"] = [
            [n, m, t] for n, m, t in extremal.truncated_max_rows(hurst, n_max)
        ]
    emit(json_text(payload), output)


@main.command("modulus")
@click.option("--H", "hurst", type=HURST, required=True)
@source_options
@click.option("--n-grid", type=int, default=12, show_default=True)
@click.option("--factor", default="auto", show_default=True,
              help="Bound factor: a number, or auto (1 for all-plus, "
                   "2**(1-H) otherwise).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
              default="json", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_modulus(hurst, coeffs, seed, explicit_file, n_grid, factor, fmt, output):
    """Check |x(t+h) - x(t)| <= factor * omega(h) over all dyadic grid pairs."""
    if factor == "auto":
        bound = 1.0 if coeffs == "all-plus" else 2.0 ** (1.0 - hurst.value)
    else:
        try:
            bound = float(Fraction(factor))
        except (ValueError, ZeroDivisionError):
            raise click.UsageError(f"--factor {factor!r} is not a number")
    x = SignedTLFunction(hurst, make_source(coeffs, seed, explicit_file))
    if fmt == "csv":
        buf = io.StringIO()
        extremal.write_modulus_table_csv(buf, x, n_grid, bound)
        emit(buf.getvalue(), output)
        return
    report = extremal.modulus_check(x, n_grid, bound)
    emit(json_text({
        "H": hurst.value, "n_grid": report.n_grid,
        "bound_factor": report.bound_factor, "max_ratio": report.max_ratio,
        "worst_t": report.t, "worst_h": report.h,
    }), output)


@main.command("sharpness")
@click.option("--H", "hurst", type=HURST, required=True)
@click.option("--n-max", type=int, default=20, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_sharpness(hurst, n_max, fmt, output):
    """Modulus sharpness probes along h_n = (2/3) 2**-n for n = 2..n-max."""
    if n_max < 2:
        raise click.UsageError("--n-max must be >= 2")
    results = [extremal.sharpness_sequence(hurst, n) for n in range(2, n_max + 1)]
    if fmt == "json":
        rows = [{"n": r.n, "h": r.h, "lhs": r.lhs, "omega": r.omega_h,
                 "ratio": r.ratio, "identity_gap": r.identity_gap}
                for r in results]
        emit(json_text(rows), output)
    else:
        buf = io.StringIO()
        extremal.write_sharpness_csv(buf, hurst, results)
        emit(buf.getvalue(), output)


@main.command("enumcheck")
@click.option("--H", "hurst", type=HURST, default=Hurst.parse("1/2"),
              help="Irrelevant to the signs; kept for interface symmetry.")
@source_options
@click.option("--n", type=int, required=True, help="Level to check (<= 20).")
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]),
              default="text", show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@guarded
def cmd_enumcheck(hurst, coeffs, seed, explicit_file, n, fmt, output):
    """Verify that the level-n cell-sign columns enumerate all sign vectors."""
    x = SignedTLFunction(hurst, make_source(coeffs, seed, explicit_file))
    complete = dyadic.column_enumeration_complete(x, n)
    if fmt == "json":
        emit(json_text({"n": n, "complete": complete}), output)
    elif fmt == "csv":
        emit(f"n,complete\n{n},{str(complete).lower()}\n", output)
    elif complete:
        click.echo(f"columns complete: 2**{n} distinct sign vectors")
    else:
        click.echo(f"columns INCOMPLETE at level {n}", err=True)
    if not complete:
        sys.exit(1)


if __name__ == "__main__":
    main()
