"""CLI subcommands."""

import platform
from collections import Counter

import click
import numpy as np

from htr.__version__ import __version__
from htr.bound2222 import bound_complex, bound_real, half_delta, slice_rank_profile
from htr.certify import typicality_report
from htr.cli.decorator import (
    OUTPUT_FORMATS,
    echo_result,
    handle_exceptions,
    pass_config,
    tensor_command,
    verify_option,
)
from htr.cli.helper import get_tensor, verify_decomposition
from htr.cli.parameter import permutation_parameter, restarts_parameter
from htr.core import ESSENTIAL_FLATTENINGS, QuadTensor, SlicePair, scalar_to_json
from htr.exceptions import PreconditionError
from htr.higher import decompose_higher, maximal_rank_lower_bound
from htr.pencil import delta_profile, dot, is_nonsingular_pair, pair_delta, theta
from htr.rank222 import classify, decompose222
from htr.sampling import CSV_COLUMNS, sample_outcomes
from htr.util import CONFIG_FILE, DEFAULT_CONFIG, FIELDS, METHODS, save_config

SUMMARY_KEYS = {3: "rank", 4: "branch", 5: "terms", 6: "terms"}


@tensor_command
def delta(
    context,
    config,
    input_file,
    tensor,
    example_name,
    field,
    seed,
    output_file,
    output_format,
    verbose,
):
    """Hyperdeterminant, Theta, dot product and nonsingularity of a 2x2x2 tensor."""
    tensor, field = get_tensor(context, input_file, tensor, example_name, field, 3)
    pair = SlicePair.from_tensor(tensor)
    value = pair_delta(pair, field)
    return {
        "field": field,
        "delta": scalar_to_json(value.value),
        "delta_sign": value.sign,
        "tolerance": value.tolerance,
        "theta": scalar_to_json(theta(pair.a, pair.b)),
        "dot": scalar_to_json(dot(pair.a, pair.b)),
        "nonsingular": is_nonsingular_pair(pair.a, pair.b, field),
        "tensor": tensor.to_dict(),
    }


@tensor_command
@verify_option
def rank222(
    context,
    config,
    input_file,
    tensor,
    example_name,
    field,
    seed,
    output_file,
    output_format,
    verbose,
    verify_file,
):
    """Rank of a 2x2x2 tensor and a decomposition with that many terms."""
    tensor, field = get_tensor(context, input_file, tensor, example_name, field, 3)
    if verify_file:
        return verify_decomposition(tensor, verify_file)
    pair = SlicePair.from_tensor(tensor)
    result = classify(pair, field).to_dict()
    decomposition = decompose222(pair, field, np.random.default_rng(seed))
    result.update(
        {
            "terms": len(decomposition),
            "residual": decomposition.residual(tensor),
            "decomposition": decomposition.to_dict(),
            "tensor": tensor.to_dict(),
        }
    )
    return result


@tensor_command
@verify_option
def bound(
    context,
    config,
    input_file,
    tensor,
    example_name,
    field,
    seed,
    output_file,
    output_format,
    verbose,
    verify_file,
):
    """Decomposition meeting the rank upper bound for the tensor order and field.

    Order 4 allows 5 real or 4 complex terms; order k >= 5 allows
    2**(k-2) + 1 real or 2**(k-2) complex terms.

    """
    tensor, field = get_tensor(context, input_file, tensor, example_name, field)
    if verify_file:
        return verify_decomposition(tensor, verify_file)
    rng = np.random.default_rng(seed)
    extra = {}
    if tensor.order == 4:
        quad = QuadTensor.from_tensor(tensor)
        if field == "complex":
            outcome = bound_complex(quad, rng)
        else:
            outcome = bound_real(quad, rng)
        extra["half_delta"] = [value.sign for value in half_delta(quad, field)]
    else:
        outcome = decompose_higher(tensor, field, rng)
    result = outcome.to_dict()
    result.update(extra)
    result.update(
        {
            "order": tensor.order,
            "field": field,
            "maximal_rank_lower_bound": maximal_rank_lower_bound(tensor.order),
            "residual": outcome.decomposition.residual(tensor),
            "tensor": tensor.to_dict(),
        }
    )
    return result


@tensor_command
@verify_option
@click.option(
    "-r",
    "--restarts",
    type=click.INT,
    callback=restarts_parameter,
    help="Number of local searches",
)
@click.option("-m", "--method", type=click.Choice(METHODS), help="Local search method")
@click.option("-w", "--workers", type=click.IntRange(min=1), help="Worker processes")
def certify(
    context,
    config,
    input_file,
    tensor,
    example_name,
    field,
    seed,
    output_file,
    output_format,
    verbose,
    verify_file,
    restarts,
    method,
    workers,
):
    """Multistart search for a four-term real certificate of a 2x2x2x2 tensor.

    A minimum bounded away from zero is numerical evidence of rank 5, not a
    proof.

    """
    tensor, field = get_tensor(context, input_file, tensor, example_name, field, 4)
    if field != "real":
        raise PreconditionError("Certificate search runs over the reals only")
    if verify_file:
        return verify_decomposition(tensor, verify_file)
    label = input_file or example_name or "inline"
    report = typicality_report(QuadTensor.from_tensor(tensor), config, label)
    result = report.to_dict()
    result["input"] = tensor.to_dict()
    return result


@tensor_command
@click.option(
    "-p",
    "--flattening",
    "flattenings",
    multiple=True,
    callback=permutation_parameter,
    help="Flattening as letters (kjil) or indices (2,1,0,3); repeatable",
)
def profile(
    context,
    config,
    input_file,
    tensor,
    example_name,
    field,
    seed,
    output_file,
    output_format,
    verbose,
    flattenings,
):
    """Hyperdeterminant signs, pencil polynomials and slice ranks per flattening."""
    tensor, field = get_tensor(context, input_file, tensor, example_name, field, 4)
    permutations = flattenings or list(ESSENTIAL_FLATTENINGS)
    ranks = slice_rank_profile(tensor, field, permutations)
    rows = []
    for permutation, slice_ranks in zip(permutations, ranks):
        values = delta_profile(tensor, permutation)
        rows.append(
            {
                "flattening": values.flattening,
                "redundant": values.redundant,
                "delta_signs": {
                    "ab": values.delta_ab.sign,
                    "cd": values.delta_cd.sign,
                    "ac": values.delta_ac.sign,
                    "bd": values.delta_bd.sign,
                },
                "pencil_ab_cd": values.pencil_ab_cd.to_list(),
                "pencil_ac_bd": values.pencil_ac_bd.to_list(),
                "slice_ranks": list(slice_ranks.ranks),
            }
        )
    return {
        "field": field,
        "flattenings": rows,
        "all_rank_three": all(
            rank == 3 for row in rows for rank in row["slice_ranks"]
        ),
        "tensor": tensor.to_dict(),
    }


@click.command()
@click.option(
    "--order", required=True, type=click.IntRange(3, 6), help="Tensor order"
)
@click.option(
    "-n", "--count", default=100, type=click.IntRange(min=1), help="Tensor count"
)
@click.option("-s", "--seed", type=click.INT, help="Random seed")
@click.option("--field", type=click.Choice(FIELDS), help="Field of the samples")
@click.option(
    "-r",
    "--restarts",
    default=0,
    type=click.IntRange(min=0),
    help="Certificate restarts per order-4 tensor (0 skips the search)",
)
@click.option(
    "-o", "--output", "--out", "output_file", type=click.Path(dir_okay=False)
)
@click.option(
    "-f",
    "--format",
    "output_format",
    type=click.Choice(OUTPUT_FORMATS),
    default="csv",
    help="Output format",
)
@click.option("-v", "--verbose", count=True, help="Verbose output")
@pass_config
@click.pass_context
@echo_result
@handle_exceptions
def sample(
    context,
    config,
    order,
    count,
    seed,
    field,
    restarts,
    output_file,
    output_format,
    verbose,
):
    """Outcomes for Gaussian random tensors, one CSV row per tensor.

    \b
    Every row: index, order, field, seed, version, tolerances.
    Order 3 adds delta, delta_sign, rank.
    Order 4 adds terms, branch, residual, min_f, conclusion.
    Orders 5 and 6 add terms, bound, residual.
    """
    field = field or config["field"]
    rows = sample_outcomes(order, count, seed=seed, field=field, restarts=restarts)
    key = SUMMARY_KEYS[order]
    if order == 4 and restarts:
        key = "conclusion"
    summary = Counter(str(row[key]) for row in rows)
    return {
        "order": order,
        "field": field,
        "count": count,
        "columns": CSV_COLUMNS[order],
        "rows": rows,
        "summary": dict(sorted(summary.items())),
    }


@click.command(name="help")
@click.pass_context
def help_(context):
    """Show this message and exit."""
    click.echo(context.parent.get_help())


@click.command()
@click.option("-s", "--seed", type=click.INT, default=DEFAULT_CONFIG["seed"])
@click.option(
    "-r",
    "--restarts",
    type=click.INT,
    default=DEFAULT_CONFIG["restarts"],
    callback=restarts_parameter,
)
@click.option(
    "-m", "--method", type=click.Choice(METHODS), default=DEFAULT_CONFIG["method"]
)
@click.option("--floor", type=click.FLOAT, default=DEFAULT_CONFIG["floor"])
@click.option(
    "--min-restarts",
    type=click.IntRange(min=1),
    default=DEFAULT_CONFIG["min_restarts"],
)
@click.option(
    "-w", "--workers", type=click.IntRange(min=1), default=DEFAULT_CONFIG["workers"]
)
@click.option("--field", type=click.Choice(FIELDS), default=DEFAULT_CONFIG["field"])
@click.option(
    "--certificate-tol", type=click.FLOAT, default=DEFAULT_CONFIG["certificate_tol"]
)
def setup(
    seed, restarts, method, floor, min_restarts, workers, field, certificate_tol
):
    """Save default settings to the configuration file."""
    config = {
        "seed": seed,
        "restarts": restarts,
        "method": method,
        "floor": floor,
        "min_restarts": min_restarts,
        "workers": workers,
        "field": field,
        "certificate_tol": certificate_tol,
    }
    save_config(config)
    click.echo("Configuration saved to {!r}".format(CONFIG_FILE))


@click.command()
def version():
    """Get version and OS information for your htr installation."""
    click.echo(
        "htr {}\n"
        "  Python {}\n"
        "  numpy {}\n"
        "  {}\n".format(
            __version__,
            platform.python_version(),
            np.__version__,
            platform.platform(),
        )
    )
