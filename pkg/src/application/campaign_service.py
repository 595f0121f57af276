"""
Campaign Service - Monte-Carlo reconciliation trials and campaigns.
Orchestrates key generation, the two-party exchange and ground-truth checks.
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import beta

from ..domain.analysis import binary_entropy, measured_efficiency, yield_gamma
from ..domain.entities import (
    AckMessage, AggregateStats, DecodeOutcome, ForwardMessage, LeakageLedger,
    QberRow, SessionParams, TrialConfig, TrialResult, library_key
)
from ..domain.exceptions import ConfigurationError
from ..domain.ldpc import select_code
from ..domain.repositories import IResultSink
from ..domain.services import SLAProtocolService
from ..infrastructure.file_repositories import FileFrozenLibraryRepository, FileLdpcRegistryRepository
from ..infrastructure.randomness import StreamRole, trial_stream
from ..infrastructure.settings import CampaignConfig
from ..infrastructure.transcript import FileTranscriptRepository
from ..sifted_key_generator import SiftedKeyGenerator

logger = logging.getLogger(__name__)

# Per-process cache of resolved sessions; filled lazily in every worker
_SESSIONS: Dict[tuple, SessionParams] = {}


def _session_key(cfg: TrialConfig) -> tuple:
    return (cfg.frozen_library, cfg.ldpc_registry, cfg.n, cfg.m, cfg.d, cfg.l,
            library_key(cfg.effective_design_qber), cfg.crc, cfg.max_iters,
            cfg.exact_metric, cfg.ldpc_margin)


def session_params(cfg: TrialConfig) -> SessionParams:
    """Frozen vector and LDPC code for a trial, looked up at its design QBER"""
    key = _session_key(cfg)
    if key not in _SESSIONS:
        design = cfg.effective_design_qber
        entry = FileFrozenLibraryRepository(cfg.frozen_library).find(cfg.n, design)
        if entry is None:
            raise ConfigurationError(f"frozen library {cfg.frozen_library} has no entry for "
                                     f"n={cfg.n}, qber={library_key(design):.2f}")
        codes = FileLdpcRegistryRepository(cfg.ldpc_registry).find_by_columns(cfg.n // cfg.m)
        ldpc = select_code(design, codes, margin=cfg.ldpc_margin, cols=cfg.n // cfg.m)
        _SESSIONS[key] = SessionParams(
            n=cfg.n, m=cfg.m, d=cfg.d, l=cfg.l, qber=design, frozen=entry.frozen,
            crc=cfg.crc, ldpc=ldpc, max_iters=cfg.max_iters, exact_metric=cfg.exact_metric,
        )
        logger.info(f"Session n={cfg.n} qber={design:.2f}: k={entry.k}, LDPC {ldpc.rows}x{ldpc.cols}")
    return _SESSIONS[key]


class TrialTrace(BaseModel):
    """Every message and intermediate of one trial"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    result: TrialResult
    forward: ForwardMessage
    ack: AckMessage
    outcome: DecodeOutcome
    ledger: LeakageLedger
    transcript_path: Optional[str] = None


def _execute(cfg: TrialConfig) -> TrialTrace:
    started = time.perf_counter()
    params = session_params(cfg)
    protocol = SLAProtocolService(params)

    k_a, k_b = SiftedKeyGenerator(cfg.seed).pair(cfg.n, cfg.qber, cfg.trial_index)
    message, u = protocol.alice_forward(k_a, trial_stream(cfg.seed, cfg.trial_index, StreamRole.ALICE_PAYLOAD))
    outcome = protocol.bob_forward(k_b, message)
    ack = protocol.bob_ack(k_b, outcome)
    k_ir_a, converged = protocol.alice_ack(k_a, u, ack)
    k_ir_b = protocol.bob_assemble(k_b, outcome)
    ledger = protocol.leakage(ack)

    accepted = [i for i, s in enumerate(outcome.sigma) if s == 0]
    decoded, truth = outcome.u_prime.split(params.m), u.split(params.m)
    false_pass = any(decoded[i] != truth[i] for i in accepted)
    if false_pass:
        logger.warning(f"trial {cfg.trial_index}: a sub-block passed its CRC with a wrong decoding")

    result = TrialResult(
        trial_index=cfg.trial_index, qber=cfg.qber, k=params.k,
        fer_failed=k_ir_a != k_ir_b, r=outcome.r, leaked_bits=ledger.total,
        ldpc_converged=converged, crc_false_pass=false_pass,
        wall_time=time.perf_counter() - started,
    )
    return TrialTrace(result=result, forward=message, ack=ack, outcome=outcome, ledger=ledger)


def run_trial(cfg: TrialConfig) -> TrialResult:
    return _execute(cfg).result


def _init_worker(log_level: int) -> None:
    logging.basicConfig(level=log_level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def clopper_pearson(failures: int, trials: int, alpha: float = 0.05) -> Tuple[float, float]:
    low = 0.0 if failures == 0 else float(beta.ppf(alpha / 2, failures, trials - failures + 1))
    high = 1.0 if failures == trials else float(beta.ppf(1 - alpha / 2, failures + 1, trials - failures))
    return low, high


def summarize(results: List[TrialResult], cfg: TrialConfig, qber: float) -> QberRow:
    """One campaign row; f accumulates leakage over every trial"""
    trials = len(results)
    failures = sum(r.fer_failed for r in results)
    fer = failures / trials
    low, high = clopper_pearson(failures, trials)
    leak_total = sum(r.leaked_bits for r in results)
    if qber > 0.0:
        f = measured_efficiency(leak_total, trials * cfg.n, qber)
        f_trial_mean = float(np.mean([measured_efficiency(r.leaked_bits, cfg.n, qber) for r in results]))
        gamma = yield_gamma(fer, f, qber)
    else:
        f = f_trial_mean = math.nan
        gamma = 1.0 - fer
    return QberRow(
        qber=qber, n=cfg.n, m=cfg.m, d=cfg.d, l=cfg.l, trials=trials, k=results[0].k,
        f=f, fer=fer, fer_ci_low=low, fer_ci_high=high, gamma=gamma,
        mean_r=float(np.mean([r.r for r in results])), leak_bits_total=leak_total,
        f_trial_mean=f_trial_mean, crc_false_passes=sum(r.crc_false_pass for r in results),
    )


def aggregate(rows: List[QberRow], interrupted: bool = False) -> AggregateStats:
    """
    Campaign totals. With one QBER they equal the row; across several QBERs
    f_mean divides all leakage by Σ trials·n·H2(qber) and gamma is the
    trial-weighted mean of the row values.
    """
    trials = sum(row.trials for row in rows)
    if not trials:
        return AggregateStats(trials=0, rows=rows, interrupted=interrupted)
    fer = sum(row.fer * row.trials for row in rows) / trials
    shannon = sum(row.trials * row.n * binary_entropy(row.qber) for row in rows)
    leaked = sum(row.leak_bits_total for row in rows)
    f_mean = leaked / shannon if shannon > 0 else math.nan
    if len(rows) == 1:
        gamma, f_trial_mean = rows[0].gamma, rows[0].f_trial_mean
    else:
        gamma = sum(row.gamma * row.trials for row in rows) / trials
        f_trial_mean = sum(row.f_trial_mean * row.trials for row in rows) / trials
    return AggregateStats(trials=trials, f_mean=f_mean, fer=fer, gamma=gamma, f_trial_mean=f_trial_mean,
                          crc_false_passes=sum(row.crc_false_passes for row in rows),
                          rows=rows, interrupted=interrupted)


class CampaignService:
    """Runs seeded trials over a QBER grid, serially or on a process pool"""

    def __init__(self, sink: Optional[IResultSink] = None):
        self.sink = sink

    def run_trial(self, cfg: TrialConfig) -> TrialResult:
        return run_trial(cfg)

    def decode_trace(self, cfg: TrialConfig, transcript_path: Optional[str] = None) -> TrialTrace:
        """One seeded trial, optionally dumping both messages"""
        trace = _execute(cfg)
        if transcript_path is not None:
            path = FileTranscriptRepository(transcript_path).dump(trace.forward, trace.ack)
            trace = trace.model_copy(update={'transcript_path': path})
        return trace

    def run_campaign(self, base_cfg: TrialConfig, qber_list: Iterable[float], trials: int,
                     workers: int = 1) -> AggregateStats:
        qbers = list(dict.fromkeys(float(q) for q in qber_list))
        if trials < 1:
            raise ConfigurationError(f"trials must be at least 1, got {trials}")
        configs = [base_cfg.for_trial(qi * trials + t, qber=q)
                   for qi, q in enumerate(qbers) for t in range(trials)]
        # resolve resources up front so configuration errors surface before any work
        for q in qbers:
            session_params(base_cfg.for_trial(0, qber=q))

        results: List[TrialResult] = []
        interrupted = False
        try:
            if workers <= 1:
                for cfg in configs:
                    results.append(run_trial(cfg))
                    self._progress(len(results), len(configs))
            else:
                pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                           initargs=(logging.getLogger().level,))
                try:
                    chunk = max(1, len(configs) // (workers * 8))
                    for result in pool.map(run_trial, configs, chunksize=chunk):
                        results.append(result)
                        self._progress(len(results), len(configs))
                finally:
                    pool.shutdown(wait=True, cancel_futures=True)
        except KeyboardInterrupt:
            interrupted = True
            logger.warning(f"Campaign interrupted after {len(results)} of {len(configs)} trials")

        results.sort(key=lambda r: r.trial_index)
        rows = []
        for qi, q in enumerate(qbers):
            subset = [r for r in results if qi * trials <= r.trial_index < (qi + 1) * trials]
            if subset:
                rows.append(summarize(subset, base_cfg, q))
        stats = aggregate(rows, interrupted)
        if self.sink is not None and rows:
            self.sink.write(stats)
        return stats

    def run(self, config: CampaignConfig) -> AggregateStats:
        qbers = config.qbers()
        base = config.trial_config(qbers[0])
        return self.run_campaign(base, qbers, config.trials, config.workers)

    @staticmethod
    def _progress(done: int, total: int) -> None:
        step = max(1, total // 10)
        if done % step == 0 or done == total:
            logger.info(f"Completed {done}/{total} trials")
