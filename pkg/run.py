#!/usr/bin/env python3
"""
SLA Reconciliation Simulator - Main Entry Point
Provides commands to provision resources, run campaigns and evaluate bounds.
"""

import argparse
import logging
import sys

from src.application.campaign_service import CampaignService
from src.application.provisioning_service import ProvisioningService
from src.domain import analysis
from src.domain.exceptions import ConfigurationError, ReconciliationError
from src.domain.value_objects import BoundInputs
from src.infrastructure.file_repositories import FileFrozenLibraryRepository, FileLdpcRegistryRepository
from src.infrastructure.result_sink import CsvResultSink, stats_frame
from src.infrastructure.settings import Settings, load_campaign_config


def _qber_list(args):
    if getattr(args, 'qber_list', None):
        return [float(q) for q in args.qber_list.split(',') if q.strip()]
    if getattr(args, 'qber', None) is not None:
        return [args.qber]
    return None


def _overrides(args):
    return {
        'n': args.n, 'm': args.m, 'd': args.d, 'l': args.l,
        'qber': args.qber,
        'qber_list': _qber_list(args) if args.qber_list else None,
        'trials': getattr(args, 'trials', None), 'seed': args.seed,
        'workers': getattr(args, 'workers', None),
        'output': getattr(args, 'output', None),
        'crc': args.crc, 'design_qber': args.design_qber,
        'frozen_library': args.frozen_library, 'ldpc_registry': args.ldpc_registry,
        'long_run': True if args.long_run else None,
    }


def construct(args, settings: Settings):
    """Build and persist a frozen-vector library"""
    qbers = _qber_list(args)
    if not qbers:
        raise ConfigurationError("construct needs --qber or --qber-list")
    directory = args.out or settings.frozen_library
    service = ProvisioningService(frozen_repo=FileFrozenLibraryRepository(directory), settings=settings)
    print(f"Constructing n={args.n} polar codes for {len(qbers)} QBER value(s) at fidelity {args.fidelity}...")
    library, paths = service.build_frozen_library(args.n, qbers, args.target_fer, args.fidelity,
                                                  workers=args.workers or settings.workers, k=args.k)
    for q in library.qbers():
        print(f"  qber={q:.2f}  k={library.entries[q].k:>10,}")
    print(f"✓ Frozen library written to {directory} ({len(paths)} files)")


def registry(args, settings: Settings):
    """Generate LDPC codes for the acknowledgment phase"""
    qbers = _qber_list(args)
    if not qbers:
        raise ConfigurationError("registry needs --qber or --qber-list")
    directory = args.out or settings.ldpc_registry
    service = ProvisioningService(registry_repo=FileLdpcRegistryRepository(directory), settings=settings)
    codes = service.build_registry(args.cols, qbers, inefficiency=args.inefficiency, seed=args.seed or 0,
                                   verify_trials=args.verify_trials, max_fer=args.max_fer)
    for code in codes:
        print(f"  {code.name:28} rate={code.rate:.4f}  threshold={code.design_threshold:.4f}")
    print(f"✓ LDPC registry written to {directory} ({len(codes)} codes)")


def run_campaign(args, settings: Settings):
    """Run a Monte-Carlo campaign and write the result table"""
    config = load_campaign_config(args.config, _overrides(args), settings)
    print(f"Running {config.trials} trial(s) per QBER at n={config.n}, m={config.m}, d={config.d}, "
          f"l={config.l} on {config.workers} worker(s)...")
    stats = CampaignService(sink=CsvResultSink(config.output)).run(config)
    print()
    print(stats_frame(stats).to_string(index=False))
    if stats.interrupted:
        print(f"✗ Campaign interrupted; partial results written to {config.output}")
    else:
        print(f"\n✓ f_mean={stats.f_mean:.4f} (per-trial mean {stats.f_trial_mean:.4f}), "
              f"fer={stats.fer:.4f}, gamma={stats.gamma:.4f}")
        print(f"✓ Results written to {config.output}")


def analyze(args, settings: Settings):
    """Closed-form bounds and sweeps"""
    if args.sweep == 'epsilon':
        frame = analysis.epsilon_sweep(args.l, args.m_values, range(args.d_min, args.d_max + 1),
                                       args.eps_f, args.eps_a)
    elif args.sweep == 'yield':
        if args.r is not None:
            frame = analysis.efficiency_yield_sweep(args.n_values, args.m_values, args.qber, args.eps_f,
                                                    args.f_II, args.d, {m: args.r for m in args.m_values})
        else:
            registry = FileLdpcRegistryRepository(args.ldpc_registry).find_all() if args.ldpc_registry else None
            frame = analysis.efficiency_yield_model(args.n_values, args.m_values, args.qber, args.eps_f,
                                                    args.d, args.f_II, registry, args.reference_n,
                                                    args.eps_block, args.fidelity)
    elif args.sweep == 'failed-blocks':
        entry = FileFrozenLibraryRepository(args.frozen_library or settings.frozen_library).find(args.n, args.qber)
        if entry is None or entry.stats is None:
            raise ConfigurationError(f"no frozen library entry with channel statistics for n={args.n}, qber={args.qber}")
        frame = analysis.failed_block_sweep(entry.stats, entry.frozen, args.m_values, args.eps_block)
    else:
        b = BoundInputs(eps_f=args.eps_f, eps_a=args.eps_a, l=args.l, d=args.d, m=args.m,
                        n=args.n, f_I=args.f_I, f_II=args.f_II, qber=args.qber)
        r = 1 if args.r is None else args.r
        print(f"  H2(qber)            {analysis.binary_entropy(b.qber):.6f}")
        print(f"  epsilon bound       {analysis.epsilon_bound(b):.6e}")
        if args.pr_r:
            print(f"  epsilon by r        {analysis.epsilon_bound_cases(b, args.pr_r):.6e}")
        print(f"  total efficiency    {analysis.total_efficiency(b, r):.6f}")
        print(f"  f (m=1)             {analysis.single_block_efficiency(b):.6f}")
        print(f"  efficiency yield    {analysis.efficiency_yield(b, r):.6e}")
        if args.fer is not None:
            f = analysis.total_efficiency(b, r)
            print(f"  yield gamma         {analysis.yield_gamma(args.fer, f, b.qber):.6f}")
        return
    print(frame.to_string(index=False))


def decode_trace(args, settings: Settings):
    """One seeded trial with transcript dump"""
    config = load_campaign_config(args.config, _overrides(args), settings)
    cfg = config.trial_config(config.qbers()[0], trial_index=args.trial_index)
    trace = CampaignService().decode_trace(cfg, args.transcript)
    result = trace.result
    print(f"  k={result.k}  r={result.r}  sigma={''.join(map(str, trace.outcome.sigma))}")
    print(f"  leakage: forward={trace.ledger.forward_bits} tags={trace.ledger.tag_bits} "
          f"sigma={trace.ledger.sigma_bits} ack={trace.ledger.ack_bits} total={trace.ledger.total}")
    print(f"  {'✗ keys differ' if result.fer_failed else '✓ keys agree'} "
          f"(LDPC converged: {result.ldpc_converged}, {result.wall_time:.2f}s)")
    if trace.transcript_path:
        print(f"✓ Transcript written to {trace.transcript_path}")


def _int_list(text):
    return [int(float(v)) for v in text.split(',') if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(',') if v.strip()]


def _session_arguments(parser):
    parser.add_argument('--config', help='JSON or YAML campaign file')
    parser.add_argument('--n', type=int, default=None)
    parser.add_argument('--m', type=int, default=None)
    parser.add_argument('--d', type=int, default=None)
    parser.add_argument('--l', type=int, default=None)
    parser.add_argument('--qber', type=float, default=None)
    parser.add_argument('--qber-list', default=None, help='comma-separated QBER values')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--crc', default=None, help='CRC preset name')
    parser.add_argument('--design-qber', type=float, default=None)
    parser.add_argument('--frozen-library', default=None)
    parser.add_argument('--ldpc-registry', default=None)
    parser.add_argument('--long-run', action='store_true', help='allow n > 2^24 or more than 10000 trials')


def build_parser():
    parser = argparse.ArgumentParser(
        description='SLA information reconciliation simulator',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python run.py construct --n 1048576 --qber-list 0.01,0.02,0.03
  python run.py registry --cols 32768 --qber-list 0.01,0.02,0.03
  python run.py run --config campaign.json --workers 8
  python run.py analyze --sweep epsilon --l 16 --m-values 1,8,32,128
  python run.py decode-trace --config campaign.json --transcript trace.bin
        """
    )
    commands = parser.add_subparsers(dest='command')

    p = commands.add_parser('construct', help='build a frozen-vector library')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--qber', type=float, default=None)
    p.add_argument('--qber-list', default=None)
    p.add_argument('--target-fer', type=float, default=0.01)
    p.add_argument('--fidelity', type=int, default=256)
    p.add_argument('--k', type=int, default=None, help='freeze exactly n-k positions instead')
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--out', default=None)

    p = commands.add_parser('registry', help='generate LDPC codes')
    p.add_argument('--cols', type=int, required=True, help='sub-block length n/m')
    p.add_argument('--qber', type=float, default=None)
    p.add_argument('--qber-list', default=None)
    p.add_argument('--inefficiency', type=float, default=1.4)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--verify-trials', type=int, default=100, help='decodes at the design threshold; 0 skips the check')
    p.add_argument('--max-fer', type=float, default=0.05)
    p.add_argument('--out', default=None)

    p = commands.add_parser('run', help='run a campaign')
    _session_arguments(p)
    p.add_argument('--trials', type=int, default=None)
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--output', default=None)

    p = commands.add_parser('analyze', help='closed-form evaluators and sweeps')
    p.add_argument('--sweep', choices=['epsilon', 'yield', 'failed-blocks'], default=None)
    p.add_argument('--eps-f', type=float, default=0.01)
    p.add_argument('--eps-a', type=float, default=1e-6)
    p.add_argument('--l', type=int, default=16)
    p.add_argument('--d', type=int, default=32)
    p.add_argument('--m', type=int, default=32)
    p.add_argument('--n', type=int, default=1 << 20)
    p.add_argument('--qber', type=float, default=0.02)
    p.add_argument('--f-I', dest='f_I', type=float, default=1.1)
    p.add_argument('--f-II', dest='f_II', type=float, default=1.2)
    p.add_argument('--r', type=int, default=None, help='failed sub-blocks; the yield sweep estimates it when omitted')
    p.add_argument('--pr-r', type=_float_list, default=None, help='Pr(r=i) for i = 0..m, comma-separated')
    p.add_argument('--fer', type=float, default=None)
    p.add_argument('--m-values', type=_int_list, default=[1, 8, 32, 128])
    p.add_argument('--n-values', type=_int_list, default=[10 ** 6, 10 ** 7, 10 ** 8, 10 ** 9])
    p.add_argument('--d-min', type=int, default=4)
    p.add_argument('--d-max', type=int, default=40)
    p.add_argument('--eps-block', type=float, default=1e-3)
    p.add_argument('--frozen-library', default=None)
    p.add_argument('--ldpc-registry', default=None, help='take f_II from the code selected for --qber')
    p.add_argument('--reference-n', type=int, default=1 << 16, help='construction length behind the r estimate')
    p.add_argument('--fidelity', type=int, default=64)

    p = commands.add_parser('decode-trace', help='run one seeded trial and dump its transcript')
    _session_arguments(p)
    p.add_argument('--trial-index', type=int, default=0)
    p.add_argument('--transcript', default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 0

    try:
        settings = Settings.from_env()
    except ReconciliationError as e:
        print(f"✗ {e}")
        return 1
    logging.basicConfig(level=getattr(logging, settings.log_level, logging.INFO),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    print("=" * 60)
    print("  SLA Information Reconciliation Simulator")
    print("=" * 60)

    handlers = {
        'construct': construct,
        'registry': registry,
        'run': run_campaign,
        'analyze': analyze,
        'decode-trace': decode_trace,
    }
    try:
        handlers[args.command](args, settings)
    except ReconciliationError as e:
        print(f"✗ {e}")
        return 1
    except Exception as e:
        print(f"\n✗ Unexpected error: {e}")
        import traceback
        traceback.print_exc()
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
