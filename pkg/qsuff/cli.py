"""
Created on Tue Oct 13 14:30 2026

Command line entry point:

    qsuff minimize exp.json
    qsuff equiv a.json b.json
    qsuff coarse a.json b.json
    qsuff povm-order m.json n.json
    qsuff povm-minimize m.json [--dilate]
    qsuff povm-kernel-check m.json
    qsuff dilate m.json

Reports go to stdout, diagnostics to stderr. Exit codes: 0 on success or a
verdict, 1 on input errors, 2 on numerical-validation failures.
"""

import argparse
import json
import logging
import sys
import time
import numpy as np
from typing import List, Optional
from .experiment.coarse_graining import channel_residuals, check_coarse_graining, experiments_isomorphic
from .experiment.koashi_imoto import conditional_expectation_for, default_t_grid, minimal_form
from .povm.discrete_povm import dilation_residuals, fully_quantum_dilation, povm_from_qc_channel
from .povm.postprocessing import (
    kernel_minimal_check,
    postprocessing_leq,
    povm_postproc_equiv,
    relabeling_kernels,
    relabeling_minimal_form,
)
from .utils._other_utils import (
    DEFAULT_TOLERANCES,
    InputError,
    NotMinimalForm,
    NumericalValidationError,
)
from .utils.conversion_utils import ConvertData, Report
from .utils.linalg_utils import dagger

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _positive_float(text: str) -> float:
    value = float(text)
    if not np.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=None, help="Feasibility tolerance (overrides feas_tol).")
    common.add_argument("--t-grid", type=_positive_int, default=None, dest="t_grid", help="Number of cocycle times.")
    common.add_argument("--starts", type=_positive_int, default=20, help="Starts of every channel search.")
    common.add_argument("--max-iter", type=_positive_int, default=5000, dest="max_iter", help="Iterations per start.")
    common.add_argument("--seed", type=int, default=0, help="Seed of every randomized step.")
    common.add_argument("--threads", type=_positive_int, default=1, help="Worker threads of the channel searches.")
    common.add_argument("--timing", action="store_true", help="Include the elapsed time in the report.")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging.")
    output = common.add_mutually_exclusive_group()
    output.add_argument("--json", action="store_const", const="json", dest="output", help="JSON report (default).")
    output.add_argument("--text", action="store_const", const="text", dest="output", help="Human-readable report.")
    common.set_defaults(output="json")

    parser = argparse.ArgumentParser(
        prog="qsuff",
        description="Minimal sufficient forms of quantum statistical experiments and discrete POVMs.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("minimize", parents=[common], help="Koashi-Imoto decomposition and minimal sufficient form.")
    sub.add_argument("experiment")
    sub.add_argument("--validate", action="store_true", help="Search for a fixing channel of the minimal form; finding one exits with 2.")
    sub.set_defaults(handler=cmd_minimize)

    sub = commands.add_parser("equiv", parents=[common], help="Isomorphism of the minimal forms of two experiments.")
    sub.add_argument("first")
    sub.add_argument("second")
    sub.set_defaults(handler=cmd_equiv)

    sub = commands.add_parser("coarse", parents=[common], help="Search a channel coarse-graining the first experiment into the second.")
    sub.add_argument("first")
    sub.add_argument("second")
    sub.set_defaults(handler=cmd_coarse)

    sub = commands.add_parser("povm-order", parents=[common], help="Postprocessing order of two POVMs, both directions.")
    sub.add_argument("first")
    sub.add_argument("second")
    sub.set_defaults(handler=cmd_povm_order)

    sub = commands.add_parser("povm-minimize", parents=[common], help="Relabeling minimal form of a POVM.")
    sub.add_argument("povm")
    sub.add_argument("--dilate", action="store_true", help="Also emit the fully quantum dilation.")
    sub.set_defaults(handler=cmd_povm_minimize)

    sub = commands.add_parser("povm-kernel-check", parents=[common], help="Kernel minimal sufficiency of a POVM.")
    sub.add_argument("povm")
    sub.set_defaults(handler=cmd_povm_kernel_check)

    sub = commands.add_parser("dilate", parents=[common], help="Fully quantum dilation of a POVM.")
    sub.add_argument("povm")
    sub.set_defaults(handler=cmd_dilate)
    return parser


def _tolerances(args):
    return DEFAULT_TOLERANCES if args.tol is None else DEFAULT_TOLERANCES.with_feas_tol(args.tol)


def _t_grid(args):
    return None if args.t_grid is None else default_t_grid(args.t_grid)


def _search_options(args) -> dict:
    return {'starts': args.starts, 'max_iter': args.max_iter, 'seed': args.seed, 'threads': args.threads}


def _report(args, verdict: str, **fields) -> Report:
    return Report(args.argv, _tolerances(args).as_dict(), verdict, **fields)


def _block_points(decomposition) -> List[List[int]]:
    """Basis indices carried by each block of a classical experiment."""
    W = decomposition.support
    points = []
    for block in decomposition.blocks:
        weights = np.real(np.diag(W @ block.central_projection @ dagger(W)))
        points.append([int(i) for i in np.nonzero(weights > 0.5)[0]])
    return points


def cmd_minimize(args) -> Report:
    tol = _tolerances(args)
    E = ConvertData.load_experiment(args.experiment, tol)
    options = _search_options(args)
    seed = options.pop('seed')
    minimal, dec = minimal_form(E, _t_grid(args), seed, args.validate, **options)
    expectation = conditional_expectation_for(E, dec)
    residuals = {
        'reconstruction': float(dec.reconstruction_residuals(E).max()),
        'expectation_idempotence': expectation.compose(expectation).distance(expectation),
        'expectation_unit': expectation.unit_residual(),
        'expectation_choi_min_eigenvalue': expectation.choi_min_eigenvalue(),
        'expectation_fixes_states': float(max(np.linalg.norm(expectation.apply_predual(rho) - rho) for rho in E.states)),
    }
    blocks = [
        {
            'd': b.d,
            'm': b.m,
            'omega': ConvertData.matrix_to_pairs(omega),
            'q': {label: float(dec.q[a, k]) for k, label in enumerate(dec.labels)},
        }
        for a, (b, omega) in enumerate(zip(dec.blocks, dec.omegas))
    ]
    payload = {
        'block_dims': dec.block_dims,
        'multiplicities': dec.multiplicities,
        'blocks': blocks,
        't_grid': [float(t) for t in dec.t_grid],
        'minimal_form': ConvertData.experiment_to_json(minimal),
        'conditional_expectation': {'choi': ConvertData.matrix_to_pairs(expectation.choi)},
        'validated': args.validate,
    }
    if E.is_classical:
        payload['block_points'] = _block_points(dec)
    return _report(args, 'minimized', payload=payload, residuals=residuals, tables={'blocks': dec.summary('pandas')})


def cmd_equiv(args) -> Report:
    tol = _tolerances(args)
    E1 = ConvertData.load_experiment(args.first, tol)
    E2 = ConvertData.load_experiment(args.second, tol)
    m1, _ = minimal_form(E1, _t_grid(args), args.seed)
    m2, _ = minimal_form(E2, _t_grid(args), args.seed)
    payload = {'first_blocks': list(m1.blocks), 'second_blocks': list(m2.blocks)}
    try:
        witness = experiments_isomorphic(m1, m2, True, **_search_options(args))
    except NotMinimalForm as error:
        logger.warning("%s", error)
        return _report(args, 'inconclusive', payload=payload)
    if witness is None:
        return _report(args, 'not-isomorphic', payload=payload)
    payload['pairing'] = witness.pairing
    payload['unitary'] = ConvertData.matrix_to_pairs(witness.as_unitary())
    return _report(args, 'isomorphic', payload=payload, residuals={'conjugation': witness.residual})


def cmd_coarse(args) -> Report:
    tol = _tolerances(args)
    E1 = ConvertData.load_experiment(args.first, tol)
    E2 = ConvertData.load_experiment(args.second, tol)
    channel = check_coarse_graining(E1, E2, **_search_options(args))
    if channel is None:
        return _report(args, 'no-witness')
    payload = {'channel': {'in_dim': channel.in_dim, 'out_dim': channel.out_dim, 'choi': ConvertData.matrix_to_pairs(channel.choi)}}
    return _report(args, 'coarse-graining', payload=payload, residuals=channel_residuals(channel, E1, E2))


def cmd_povm_order(args) -> Report:
    tol = _tolerances(args)
    M = ConvertData.load_povm(args.first, tol)
    N = ConvertData.load_povm(args.second, tol)
    forward = postprocessing_leq(M, N)
    backward = postprocessing_leq(N, M)
    payload = {
        'first<=second': 'infeasible' if forward is None else 'feasible',
        'second<=first': 'infeasible' if backward is None else 'feasible',
    }
    tables = {}
    if forward is not None:
        payload['first<=second_kernel'] = ConvertData.kernel_to_json(forward)
        tables['kernel first<=second'] = forward.summary('pandas')
    if backward is not None:
        payload['second<=first_kernel'] = ConvertData.kernel_to_json(backward)
        tables['kernel second<=first'] = backward.summary('pandas')
    verdict = {
        (True, True): 'equivalent',
        (True, False): 'first<=second',
        (False, True): 'second<=first',
        (False, False): 'incomparable',
    }[(forward is not None, backward is not None)]
    return _report(args, verdict, payload=payload, tables=tables)


def _dilation_payload(M):
    gamma, pinching = fully_quantum_dilation(M)
    recovered = povm_from_qc_channel(gamma, tolerances=M.tolerances)
    equivalent, _, _ = povm_postproc_equiv(M.nonzero()[0], recovered)
    payload = {
        'gamma': {'in_dim': gamma.in_dim, 'out_dim': gamma.out_dim, 'choi': ConvertData.matrix_to_pairs(gamma.choi)},
        'pinching': {'dim': pinching.in_dim, 'choi': ConvertData.matrix_to_pairs(pinching.choi)},
        'recovered_povm_equivalent': bool(equivalent),
    }
    residuals = {f"dilation_{k}": v for k, v in dilation_residuals(M, gamma, pinching).items()}
    residuals['dilation_choi_min_eigenvalue'] = gamma.choi_min_eigenvalue()
    residuals['dilation_unit'] = gamma.unit_residual()
    return payload, residuals


def cmd_povm_minimize(args) -> Report:
    M = ConvertData.load_povm(args.povm, _tolerances(args))
    minimal, merge_map = relabeling_minimal_form(M)
    relabel, split = relabeling_kernels(M, minimal, merge_map)
    payload = {
        'minimal_povm': ConvertData.povm_to_json(minimal),
        'merge_map': merge_map,
        'relabel_kernel': ConvertData.kernel_to_json(relabel),
        'split_kernel': ConvertData.kernel_to_json(split),
    }
    residuals = {
        'relabel': float(np.linalg.norm(relabel.apply(M).effects - minimal.effects)),
        'split': float(np.linalg.norm(split.apply(minimal).effects - M.effects)),
    }
    if args.dilate:
        dilation, extra = _dilation_payload(M)
        payload['dilation'] = dilation
        residuals.update(extra)
    verdict = 'minimal' if len(minimal) == len(M) else 'merged'
    return _report(args, verdict, payload=payload, residuals=residuals, tables={'relabel kernel': relabel.summary('pandas')})


def cmd_povm_kernel_check(args) -> Report:
    M = ConvertData.load_povm(args.povm, _tolerances(args))
    minimal, value = kernel_minimal_check(M)
    return _report(args, 'minimal' if minimal else 'not-minimal', payload={'lp_value': value})


def cmd_dilate(args) -> Report:
    M = ConvertData.load_povm(args.povm, _tolerances(args))
    payload, residuals = _dilation_payload(M)
    return _report(args, 'dilated', payload=payload, residuals=residuals)


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)

    start = time.perf_counter()
    try:
        report = args.handler(args)
    except (InputError, OSError, json.JSONDecodeError) as error:
        logger.error("%s", error)
        return 1
    except (NumericalValidationError, NotMinimalForm) as error:
        logger.error("%s: %s", type(error).__name__, error)
        for name in ('gap_statistics', 'spread'):
            if getattr(error, name, None):
                logger.error("%s: %s", name, getattr(error, name))
        return 2
    if args.timing:
        report.timing = time.perf_counter() - start
    sys.stdout.write(report.to_json() + "\n" if args.output == 'json' else report.to_text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
