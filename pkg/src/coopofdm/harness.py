"""Monte-Carlo harness: scenario configuration, block trials, sweeps, studies.

Every trial is a pure function of (config, master seed, trial id): all draws
come from counter-based streams keyed by those values, so results do not
depend on scheduling or worker count.  Aggregation only ever adds error and
symbol counts, which keeps it order-independent as well.

Signal-level bookkeeping: Es = 1 is the energy of one QPSK constellation
symbol and the Es/N0 grid sets the complex noise variance per time-domain
sample, N0 = 10 ** (-EsN0_dB / 10).  With the unnormalized forward DFT at the
receiver a per-sample variance N0 turns into a per-bin variance of K * N0
(the same for every bin), which is the figure handed to the demapper.
"""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from multiprocessing import Pool
from typing import Sequence

import numpy as np

from . import bicm, stbc
from .channel import ChannelConfig, draw_rician, apply_uplink
from .dsp import RngStream, gaussian_noise
from .stbc import CompositeChannel, StbcConfig
from .vchan import ApfConfig, VirtualChannelMatrix, generate_apf_vchan, generate_dither_vchan

SCHEMES = ("apf", "phase-dither")
ESTIMATORS = ("ls", "cyclic-delay", "perfect-csi")
SER_POINTS = ("post-decoder", "pre-decoder")
VCHAN_REDRAW = ("per-block", "per-run")

# Stream roles under one trial key, plus a scope for run-wide draws.
_ROLE_VCHAN = 0
_ROLE_CHANNEL = 1
_ROLE_DATA = 2
_ROLE_NOISE = 3
_RUN_SCOPE = 0x7FFFFFFF

_TRIAL_BATCH = 200


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one simulated scenario plus its sweep grid."""

    uavs: int = 2
    scheme: str = "apf"
    estimator: str = "cyclic-delay"
    master_seed: int = 12345
    ser_point: str = "post-decoder"
    vchan_redraw: str = "per-block"
    interleaver_seed: int = 7
    stbc: StbcConfig = field(default_factory=StbcConfig)
    apf: ApfConfig = field(default_factory=ApfConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    esn0_grid_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    blocks_per_point: int = 20000
    min_symbol_errors: int = 100

    @property
    def info_bits_per_block(self) -> int:
        return self.stbc.coded_bits_per_block // 2 - bicm.TAIL_BITS

    def validate(self) -> None:
        self.stbc.validate()
        self.channel.validate()
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if self.ser_point not in SER_POINTS:
            raise ValueError(f"ser_point must be one of {SER_POINTS}")
        if self.vchan_redraw not in VCHAN_REDRAW:
            raise ValueError(f"vchan_redraw must be one of {VCHAN_REDRAW}")
        if self.uavs < 1:
            raise ValueError("need at least one relay")
        if self.scheme == "apf":
            self.apf.validate()
            if self.apf.num_taps != self.stbc.vchan_taps:
                raise ValueError("all-pass taps must match the framing tap budget")
        if self.estimator == "cyclic-delay":
            if self.scheme != "apf":
                raise ValueError("cyclic-delay estimation needs the all-pass scheme")
            if self.stbc.vchan_taps + self.stbc.cp_len > self.stbc.subcarriers // self.stbc.code_dims:
                raise ValueError(
                    "cyclic-delay estimation needs vchan_taps + cp_len <= subcarriers / dims"
                )
        if self.channel.num_taps - 1 > self.stbc.cp_len:
            raise ValueError("cyclic prefix must cover the channel memory")
        if any(not math.isfinite(v) for v in self.esn0_grid_db):
            raise ValueError("Es/N0 grid values must be finite")
        if self.blocks_per_point < 1 or self.min_symbol_errors < 1:
            raise ValueError("stopping rule needs positive block and error budgets")


@dataclass(frozen=True)
class BlockCounts:
    """Error bookkeeping for one block; addition merges trial results."""

    pre_symbol_errors: int = 0
    pre_symbols: int = 0
    post_symbol_errors: int = 0
    post_symbols: int = 0
    bit_errors: int = 0
    bits: int = 0

    def __add__(self, other: "BlockCounts") -> "BlockCounts":
        return BlockCounts(
            self.pre_symbol_errors + other.pre_symbol_errors,
            self.pre_symbols + other.pre_symbols,
            self.post_symbol_errors + other.post_symbol_errors,
            self.post_symbols + other.post_symbols,
            self.bit_errors + other.bit_errors,
            self.bits + other.bits,
        )

    def selected(self, ser_point: str) -> tuple[int, int]:
        if ser_point == "pre-decoder":
            return self.pre_symbol_errors, self.pre_symbols
        return self.post_symbol_errors, self.post_symbols


@dataclass(frozen=True)
class SweepRow:
    """One Monte-Carlo operating point, ready for CSV serialization."""

    scheme: str
    estimator: str
    uavs: int
    apf_order: int
    pole_modulus: float
    vchan_taps: int
    k_rice_db: float
    esn0_db: float
    blocks: int
    symbols: int
    symbol_errors: int
    ser: float
    ser_ci95: float
    bits: int
    bit_errors: int
    ber: float
    seed: int
    config_digest: str
    runtime_s: float = 0.0


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    config_digest: str


CSV_HEADER = (
    "scheme,estimator,U,M,Mp,Tc,KriceDb,EsN0Db,blocks,symbols,"
    "symbolErrors,ser,serCi95,bits,bitErrors,ber,seed,configDigest"
)


def config_digest(cfg: ScenarioConfig) -> str:
    """Short stable digest of the resolved configuration."""
    flat = []

    def walk(prefix: str, value) -> None:
        if isinstance(value, dict):
            for key in sorted(value):
                walk(f"{prefix}.{key}" if prefix else key, value[key])
        elif isinstance(value, (tuple, list)):
            flat.append(f"{prefix}={','.join(repr(v) for v in value)}")
        else:
            flat.append(f"{prefix}={value!r}")

    walk("", asdict(cfg))
    text = "\n".join(sorted(flat))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


@lru_cache(maxsize=16)
def _interleaver(n: int, seed: int) -> np.ndarray:
    return bicm.make_interleaver(n, seed)


@lru_cache(maxsize=16)
def _pilot_tones(subcarriers: int, seed: int) -> np.ndarray:
    return stbc.make_pilot_tones(subcarriers, seed)


def _draw_vchan(cfg: ScenarioConfig, uav: int, trial_id: int) -> VirtualChannelMatrix:
    if cfg.vchan_redraw == "per-run":
        rng = RngStream(cfg.master_seed, (_RUN_SCOPE, _ROLE_VCHAN, uav)).generator()
    else:
        rng = RngStream(cfg.master_seed, (trial_id, _ROLE_VCHAN, uav)).generator()
    if cfg.scheme == "apf":
        return generate_apf_vchan(cfg.apf, cfg.stbc.code_dims, cfg.stbc.subcarriers, rng)
    return generate_dither_vchan(
        cfg.stbc.code_dims, cfg.stbc.subcarriers, cfg.stbc.group_size, rng
    )


def _build_pilot_spectrum(cfg: ScenarioConfig, vchan: VirtualChannelMatrix) -> np.ndarray:
    tones = _pilot_tones(cfg.stbc.subcarriers, cfg.stbc.pilot_seed)
    if cfg.estimator == "cyclic-delay":
        return stbc.build_pilot_cyclic(tones, vchan.freq)
    return stbc.build_pilot_ls(tones, vchan.freq, cfg.stbc.group_size)


def _estimate(
    cfg: ScenarioConfig,
    pilot_spectra: np.ndarray,
    vchans: Sequence[VirtualChannelMatrix],
    channels: np.ndarray,
) -> CompositeChannel:
    if cfg.estimator == "perfect-csi":
        return stbc.composite_channel(vchans, channels)
    tones = _pilot_tones(cfg.stbc.subcarriers, cfg.stbc.pilot_seed)
    if cfg.estimator == "cyclic-delay":
        return stbc.estimate_cyclic(pilot_spectra, tones, cfg.stbc)
    return stbc.estimate_ls(
        pilot_spectra, tones, cfg.stbc, denoise=(cfg.scheme == "apf")
    )


def run_block_trial(
    cfg: ScenarioConfig,
    esn0_db: float,
    trial_id: int,
    vchan_override: Sequence[VirtualChannelMatrix] | None = None,
    channel_override: np.ndarray | None = None,
) -> BlockCounts:
    """Simulate one block end to end and count errors at both measuring points.

    The overrides pin the virtual channels or the channel taps for engineered
    checks; normal operation redraws both per block.
    """
    scfg = cfg.stbc
    k = scfg.subcarriers
    n0_sample = 10.0 ** (-esn0_db / 10.0)
    n0_bin = k * n0_sample

    if vchan_override is not None:
        vchans = list(vchan_override)
    else:
        vchans = [_draw_vchan(cfg, u, trial_id) for u in range(cfg.uavs)]
    if channel_override is not None:
        channels = np.asarray(channel_override)
    else:
        channels = np.stack(
            [
                draw_rician(
                    cfg.channel,
                    RngStream(cfg.master_seed, (trial_id, _ROLE_CHANNEL, u)).generator(),
                )
                for u in range(cfg.uavs)
            ]
        )

    data_rng = RngStream(cfg.master_seed, (trial_id, _ROLE_DATA)).generator()
    noise_rng = RngStream(cfg.master_seed, (trial_id, _ROLE_NOISE)).generator()

    n_info = cfg.info_bits_per_block
    perm = _interleaver(scfg.coded_bits_per_block, cfg.interleaver_seed)
    info_bits = data_rng.integers(0, 2, size=n_info).astype(np.uint8)
    coded = bicm.conv_encode(info_bits)
    symbols = bicm.qpsk_map(bicm.interleave(coded, perm))
    sym_grid = symbols.reshape(scfg.data_symbols, k)

    streams = np.empty((cfg.uavs, scfg.block_symbols * (k + scfg.cp_len)), dtype=complex)
    for u in range(cfg.uavs):
        pilot_spec = _build_pilot_spectrum(cfg, vchans[u])
        frame = np.empty((scfg.block_symbols, k), dtype=complex)
        frame[: scfg.pilot_symbols] = pilot_spec
        frame[scfg.pilot_symbols :] = stbc.stbc_encode(sym_grid, vchans[u])
        streams[u] = stbc.ofdm_modulate(frame, scfg.cp_len).ravel()

    received = apply_uplink(streams, channels, n0_sample, noise_rng)
    spectra = stbc.ofdm_demodulate(
        received.reshape(scfg.block_symbols, k + scfg.cp_len), k, scfg.cp_len
    )
    comp = _estimate(cfg, spectra[: scfg.pilot_symbols], vchans, channels)

    data_spec = spectra[scfg.pilot_symbols :]
    y_groups = data_spec.reshape(scfg.data_symbols, k // 2, 2)
    h_groups = np.stack([comp.freq[0, 0::2], comp.freq[1, 0::2]], axis=-1)
    s_hat, gamma = stbc.alamouti_combine(y_groups, h_groups)

    erased = gamma == 0.0
    llrs = bicm.qpsk_demap_llr(s_hat, np.where(erased, 1.0, gamma), n0_bin)
    if np.any(erased):
        llrs[:, erased, :, :] = 0.0
    decoded = bicm.viterbi_decode(
        bicm.deinterleave(llrs.reshape(-1), perm), n_info
    )

    bit_errors = int(np.sum(decoded != info_bits))
    tx_pairs = info_bits.reshape(-1, 2)
    rx_pairs = decoded.reshape(-1, 2)
    post_errors = int(np.sum(np.any(tx_pairs != rx_pairs, axis=1)))

    tx_sym = np.stack([sym_grid[:, 0::2], sym_grid[:, 1::2]], axis=-1)
    pre_errors = int(
        np.sum(
            ((s_hat.real < 0) != (tx_sym.real < 0))
            | ((s_hat.imag < 0) != (tx_sym.imag < 0))
        )
    )
    return BlockCounts(
        pre_symbol_errors=pre_errors,
        pre_symbols=tx_sym.size,
        post_symbol_errors=post_errors,
        post_symbols=rx_pairs.shape[0],
        bit_errors=bit_errors,
        bits=n_info,
    )


def _trial_task(args: tuple[ScenarioConfig, float, int]) -> BlockCounts:
    cfg, esn0_db, trial_id = args
    return run_block_trial(cfg, esn0_db, trial_id)


def _run_point(
    cfg: ScenarioConfig, esn0_db: float, workers: int
) -> tuple[BlockCounts, int]:
    """Run batches of trials until the error or block budget is exhausted.

    Batch boundaries are fixed, so the set of executed trial ids (and with it
    every count) is identical for any worker count.
    """
    total = BlockCounts()
    next_trial = 0
    pool = Pool(workers) if workers > 1 else None
    try:
        while next_trial < cfg.blocks_per_point:
            if total.selected(cfg.ser_point)[0] >= cfg.min_symbol_errors:
                break
            batch_end = min(next_trial + _TRIAL_BATCH, cfg.blocks_per_point)
            tasks = [(cfg, esn0_db, t) for t in range(next_trial, batch_end)]
            if pool is None:
                results = [_trial_task(t) for t in tasks]
            else:
                results = pool.map(_trial_task, tasks)
            for counts in results:
                total = total + counts
            next_trial = batch_end
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    return total, next_trial


def _build_row(
    cfg: ScenarioConfig,
    esn0_db: float,
    counts: BlockCounts,
    blocks: int,
    digest: str,
    runtime_s: float,
) -> SweepRow:
    errors, symbols = counts.selected(cfg.ser_point)
    ser = errors / symbols
    ci = 1.96 * math.sqrt(ser * (1.0 - ser) / symbols)
    if cfg.scheme == "apf":
        order, modulus, taps = cfg.apf.order, cfg.apf.pole_modulus, cfg.apf.num_taps
    else:
        order, modulus, taps = 0, 0.0, 0
    return SweepRow(
        scheme=cfg.scheme,
        estimator=cfg.estimator,
        uavs=cfg.uavs,
        apf_order=order,
        pole_modulus=modulus,
        vchan_taps=taps,
        k_rice_db=cfg.channel.k_rice_db,
        esn0_db=esn0_db,
        blocks=blocks,
        symbols=symbols,
        symbol_errors=errors,
        ser=ser,
        ser_ci95=ci,
        bits=counts.bits,
        bit_errors=counts.bit_errors,
        ber=counts.bit_errors / counts.bits,
        seed=cfg.master_seed,
        config_digest=digest,
        runtime_s=runtime_s,
    )


def run_sweep(cfg: ScenarioConfig, workers: int = 1) -> SweepResult:
    """Monte-Carlo SER/BER over the configured Es/N0 grid."""
    cfg.validate()
    digest = config_digest(cfg)
    rows = []
    for esn0_db in cfg.esn0_grid_db:
        start = time.perf_counter()
        counts, blocks = _run_point(cfg, esn0_db, workers)
        rows.append(
            _build_row(cfg, esn0_db, counts, blocks, digest, time.perf_counter() - start)
        )
    return SweepResult(rows=tuple(rows), config_digest=digest)


def pole_modulus_study(
    cfg: ScenarioConfig,
    mp_grid: Sequence[float],
    m_grid: Sequence[int],
    tc_set: Sequence[int],
    esn0_db: float = 30.0,
    workers: int = 1,
) -> SweepResult:
    """SER over a grid of pole moduli, filter orders and truncation lengths.

    Runs at a single Es/N0 point with the all-pass scheme; everything else is
    taken from cfg.
    """
    rows = []
    digests = set()
    for taps in tc_set:
        for order in m_grid:
            for modulus in mp_grid:
                sub = replace(
                    cfg,
                    scheme="apf",
                    apf=ApfConfig(order=order, pole_modulus=modulus, num_taps=taps),
                    stbc=replace(cfg.stbc, vchan_taps=taps),
                    esn0_grid_db=(esn0_db,),
                )
                result = run_sweep(sub, workers)
                rows.extend(result.rows)
                digests.add(result.config_digest)
    return SweepResult(rows=tuple(rows), config_digest=";".join(sorted(digests)))


@dataclass(frozen=True)
class FlatnessRow:
    uavs: int
    realizations: int
    mean_abs_dev: float
    max_abs_dev: float
    mean_selectivity: float


@dataclass(frozen=True)
class FlatnessReport:
    rows: tuple[FlatnessRow, ...]
    traces: dict[int, np.ndarray]
    config_digest: str


def flatness_report(
    cfg: ScenarioConfig,
    u_list: Sequence[int],
    realizations: int = 200,
    ideal_channel: bool = False,
) -> FlatnessReport:
    """Composite-magnitude statistics of dimension 0 for several relay counts.

    Per relay count the report keeps one sampled |H(0, k)| trace, the mean and
    max deviation from unit magnitude, and the mean selectivity (variance of
    |H(0, k)| across bins), averaged over the realizations.  With
    ideal_channel the propagation taps are pinned to a delta so the trace
    shows the virtual channels alone.
    """
    cfg.validate()
    if realizations < 1:
        raise ValueError("need at least one realization")
    rows = []
    traces: dict[int, np.ndarray] = {}
    for uavs in u_list:
        if uavs < 1:
            raise ValueError("relay counts must be positive")
        sub = replace(cfg, uavs=uavs)
        devs = np.empty(realizations)
        maxdevs = np.empty(realizations)
        selectivity = np.empty(realizations)
        for r in range(realizations):
            vchans = [_draw_vchan(sub, u, r) for u in range(uavs)]
            if ideal_channel:
                channels = np.zeros((uavs, cfg.channel.num_taps), dtype=complex)
                channels[:, 0] = 1.0
            else:
                channels = np.stack(
                    [
                        draw_rician(
                            cfg.channel,
                            RngStream(cfg.master_seed, (r, _ROLE_CHANNEL, u)).generator(),
                        )
                        for u in range(uavs)
                    ]
                )
            mag = np.abs(stbc.composite_channel(vchans, channels).freq[0])
            if r == 0:
                traces[uavs] = mag
            devs[r] = np.mean(np.abs(mag - 1.0))
            maxdevs[r] = np.max(np.abs(mag - 1.0))
            selectivity[r] = np.var(mag)
        rows.append(
            FlatnessRow(
                uavs=uavs,
                realizations=realizations,
                mean_abs_dev=float(devs.mean()),
                max_abs_dev=float(maxdevs.max()),
                mean_selectivity=float(selectivity.mean()),
            )
        )
    return FlatnessReport(
        rows=tuple(rows), traces=traces, config_digest=config_digest(cfg)
    )


def write_results(rows: Sequence[SweepRow], path: str, append: bool = False) -> None:
    """Serialize sweep rows to CSV; appending keeps the single header line."""
    import os

    write_header = True
    if append and os.path.exists(path) and os.path.getsize(path) > 0:
        write_header = False
    with open(path, "a" if append else "w") as fh:
        if write_header:
            fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.scheme},{r.estimator},{r.uavs},{r.apf_order},{r.pole_modulus!r},"
                f"{r.vchan_taps},{r.k_rice_db!r},{r.esn0_db!r},{r.blocks},{r.symbols},"
                f"{r.symbol_errors},{r.ser!r},{r.ser_ci95!r},{r.bits},{r.bit_errors},"
                f"{r.ber!r},{r.seed},{r.config_digest}\n"
            )


def read_results(path: str) -> list[SweepRow]:
    """Parse a results CSV back into rows (runtime is not stored)."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError("unrecognized results header")
        for line in fh:
            line = line.strip()
            if not line or line == CSV_HEADER:
                continue
            f = line.split(",")
            if len(f) != 18:
                raise ValueError(f"malformed results row: {line}")
            rows.append(
                SweepRow(
                    scheme=f[0],
                    estimator=f[1],
                    uavs=int(f[2]),
                    apf_order=int(f[3]),
                    pole_modulus=float(f[4]),
                    vchan_taps=int(f[5]),
                    k_rice_db=float(f[6]),
                    esn0_db=float(f[7]),
                    blocks=int(f[8]),
                    symbols=int(f[9]),
                    symbol_errors=int(f[10]),
                    ser=float(f[11]),
                    ser_ci95=float(f[12]),
                    bits=int(f[13]),
                    bit_errors=int(f[14]),
                    ber=float(f[15]),
                    seed=int(f[16]),
                    config_digest=f[17],
                )
            )
    return rows


def write_flatness(report: FlatnessReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("U,realizations,meanAbsDev,maxAbsDev,meanSelectivity,configDigest\n")
        for r in report.rows:
            fh.write(
                f"{r.uavs},{r.realizations},{r.mean_abs_dev!r},{r.max_abs_dev!r},"
                f"{r.mean_selectivity!r},{report.config_digest}\n"
            )


def qpsk_awgn_ber_theory(ebn0_db: float) -> float:
    """Textbook uncoded Gray-QPSK bit error rate at the given per-bit SNR."""
    ratio = 10.0 ** (ebn0_db / 10.0)
    return 0.5 * math.erfc(math.sqrt(2.0 * ratio) / math.sqrt(2.0))


def diagnostic_uncoded_awgn(
    ebn0_db: float, n_symbols: int, seed: int
) -> tuple[int, int]:
    """Uncoded QPSK over plain AWGN, bypassing coding, space-time and fading.

    The grid value is the per-bit SNR, so the measured BER tracks the
    qpsk_awgn_ber_theory curve Q(sqrt(2 * Eb/N0)).  Serves as the end-to-end
    noise calibration check.
    """
    if n_symbols < 1:
        raise ValueError("need at least one symbol")
    rng = RngStream(seed, (_ROLE_DATA,)).generator()
    noise_rng = RngStream(seed, (_ROLE_NOISE,)).generator()
    bits = rng.integers(0, 2, size=2 * n_symbols).astype(np.uint8)
    tx = bicm.qpsk_map(bits)
    n0 = 1.0 / (2.0 * 10.0 ** (ebn0_db / 10.0))
    rx = tx + gaussian_noise(n_symbols, n0, noise_rng)
    hard = np.empty(2 * n_symbols, dtype=np.uint8)
    hard[0::2] = rx.real < 0
    hard[1::2] = rx.imag < 0
    return int(np.sum(hard != bits)), 2 * n_symbols
