"""Deterministic simulation loops: seeded games, adversaries, and grids.

All randomness flows from a SplitMix64 sequence generator so that a given
(config, seed) pair reproduces bit-identical runs.  Games are affinely
normalized into [0, 1] before play so every loss vector delivered to a
learner is a valid loss vector; the normalization never changes best
responses or equilibria.

Round timing is simultaneous-move: both sides commit their round-t
strategies before either observes the other's, and feedback arrives after
the round.  A non-oblivious adversary reacting to the agent therefore
sees only f_1 .. f_{t-1} when choosing y_t.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics, nash
from .core import MatrixGame, Trace, check_loss_vector, uniform
from .learners import (
    Aftrl,
    Amd,
    BestResponseLearner,
    DoublingAftrl,
    Mwu,
    Omwu,
    ProdBr,
    amwu_step,
)
from .regularizers import ENTROPY, from_name

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The SplitMix64 sequence generator (published mixing constants).

    Uniform doubles are drawn from the top 53 bits, so identical seeds
    yield identical streams in any implementation of the same algorithm.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53


def make_random_game(n: int, m: int, seed: int) -> MatrixGame:
    """A game with i.i.d. uniform [0, 1] entries, filled row-major."""
    if n < 2 or m < 2:
        raise ValueError(f"need at least 2 actions per side, got {n}x{m}")
    rng = SplitMix64(seed)
    entries = [rng.next_double() for _ in range(n * m)]
    return MatrixGame(np.array(entries).reshape(n, m))


@dataclass(frozen=True)
class GameSpec:
    """Where the payoff matrix comes from: a seeded draw or a CSV file."""

    kind: str  # "random" | "csv"
    n: int | None = None
    m: int | None = None
    seed: int | None = None
    path: str | None = None

    def resolve(self) -> MatrixGame:
        if self.kind == "random":
            return make_random_game(self.n, self.m, self.seed)
        if self.kind == "csv":
            return MatrixGame.from_csv(self.path)
        raise ValueError(f"unknown game kind {self.kind!r}")


@dataclass(frozen=True)
class AgentSpec:
    kind: str  # FTRL | OFTRL | AFTRL | AMD | MWU | OMWU | AMWU | BestResponse | ProdBR | DoublingAFTRL
    eta: float | None = None
    alpha: float | None = None
    b: float | None = None
    regularizer: str = "entropy"
    name: str | None = None

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else self.kind

    def resolved_alpha(self) -> float:
        """Exploit rate, either given directly or derived as eta^(b-1)."""
        if self.alpha is not None:
            return self.alpha
        if self.b is not None:
            if self.eta is None:
                raise ValueError("agent: b given without eta")
            return float(self.eta ** (self.b - 1.0))
        return _DEFAULT_ALPHA.get(self.kind, 0.0)


_DEFAULT_ALPHA = {"FTRL": 0.0, "MWU": 0.0, "OFTRL": 1.0, "OMWU": 1.0}


@dataclass(frozen=True)
class AdversarySpec:
    kind: str  # "oblivious_mwu" | "nonoblivious_mwu" | "self_play"
    eta: float | None = None
    recorder_eta: float | None = None  # oblivious recording partner; defaults to eta


ADVERSARY_METRICS = (
    "average_loss",
    "external_regret",
    "dynamic_regret",
    "average_dynamic_regret",
    "forward_regret",
    "step_distance_l1",
)
SELF_PLAY_METRICS = ("exploitability", "kl_to_ne")


@dataclass(frozen=True)
class SimulationConfig:
    game: GameSpec
    horizon: int
    agent: AgentSpec
    adversary: AdversarySpec
    metrics: tuple[str, ...] = ()
    output: str | None = None

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError(f"horizon must be at least 2, got {self.horizon}")
        if not self.metrics:
            default = (
                SELF_PLAY_METRICS if self.adversary.kind == "self_play" else ADVERSARY_METRICS
            )
            object.__setattr__(self, "metrics", default)


@dataclass
class RunOutcome:
    index: int
    config: SimulationConfig
    series: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    error: str | None = None


def build_agent(spec: AgentSpec, n: int, horizon: int):
    """Instantiate the loss-stream learner named by an agent spec."""
    kind = spec.kind
    reg = from_name(spec.regularizer)
    alpha = spec.resolved_alpha()
    if kind in ("FTRL", "OFTRL", "AFTRL"):
        return Aftrl(n, spec.eta, alpha=alpha, reg=reg)
    if kind == "AMWU":
        # multiplicative special case of the leader update: entropy regularizer
        return Aftrl(n, spec.eta, alpha=alpha, reg=ENTROPY)
    if kind == "AMD":
        return Amd(n, spec.eta, alpha=alpha, reg=reg)
    if kind == "MWU":
        return Mwu(n, spec.eta)
    if kind == "OMWU":
        return Omwu(n, spec.eta)
    if kind == "BestResponse":
        return BestResponseLearner(n)
    if kind == "ProdBR":
        return ProdBr(n, horizon=horizon, reg=reg)
    if kind == "DoublingAFTRL":
        return DoublingAftrl(n, spec.eta, alpha, reg=reg)
    raise ValueError(f"unknown agent kind {kind!r}")


def record_oblivious_trace(
    game: MatrixGame, adversary_eta: float, horizon: int, recorder_eta: float | None = None
) -> np.ndarray:
    """Strategy sequence of a column MWU player facing a fixed row MWU.

    Both third parties start uniform; the column player's strategies are
    recorded for later replay as an oblivious loss source.  The recording
    partner's rate defaults to the adversary's.
    """
    if adversary_eta <= 0.0:
        raise ValueError(f"adversary eta must be positive, got {adversary_eta}")
    unit, _, _ = game.to_unit_range()
    a = unit.payoff
    n, m = unit.n, unit.m
    row = Mwu(n, recorder_eta if recorder_eta is not None else adversary_eta)
    col = Mwu(m, adversary_eta)
    ys = np.empty((horizon, m))
    r = row.start()
    y = col.start()
    for t in range(horizon):
        ys[t] = y
        row_loss = a @ y
        col_loss = 1.0 - a.T @ r  # the column player's loss is the negated gain, kept in [0, 1]
        r = row.step(row_loss)
        y = col.step(col_loss)
    return ys


def _adversary_series(config: SimulationConfig, trace: Trace, agent) -> dict:
    eta = getattr(agent, "eta", None) or 1.0
    reg = getattr(agent, "reg", ENTROPY)
    out = {}
    for name in config.metrics:
        if name == "average_loss":
            out[name] = metrics.average_loss(trace)
        elif name == "external_regret":
            out[name] = metrics.external_regret(trace)
        elif name == "dynamic_regret":
            out[name] = metrics.dynamic_regret(trace)
        elif name == "average_dynamic_regret":
            out[name] = metrics.average_dynamic_regret(trace)
        elif name == "forward_regret":
            out[name] = metrics.forward_regret(trace, reg, eta)
        elif name == "step_distance_l1":
            out[name] = metrics.step_distances(trace, 1)
        else:
            raise ValueError(f"unknown metric {name!r} for an adversary run")
    return out


def run_vs_adversary(config: SimulationConfig):
    """Simulate one agent against a replayed or reactive adversary.

    Returns (trace, series, game) where the trace records the agent's
    strategies and the loss stream x_t = A y_t on the unit-normalized game.
    """
    game = config.game.resolve()
    unit, _, _ = game.to_unit_range()
    a = unit.payoff
    n, m = unit.n, unit.m
    T = config.horizon
    agent = build_agent(config.agent, n, T)
    adv = config.adversary

    replay = None
    col = None
    if adv.kind == "oblivious_mwu":
        replay = record_oblivious_trace(unit, adv.eta, T, adv.recorder_eta)
        if replay.shape[0] < T:
            raise ValueError(f"replay shorter than horizon: {replay.shape[0]} < {T}")
    elif adv.kind == "nonoblivious_mwu":
        if adv.eta is None or adv.eta <= 0.0:
            raise ValueError("nonoblivious_mwu adversary needs a positive eta")
        col = Mwu(m, adv.eta)
    else:
        raise ValueError(f"run_vs_adversary cannot handle adversary kind {adv.kind!r}")

    strategies = np.empty((T, n))
    losses = np.empty((T, n))
    f = agent.start()
    y = col.start() if col is not None else None
    for t in range(T):
        y_t = replay[t] if replay is not None else y
        x_t = a @ y_t
        check_loss_vector(x_t, context=f"round {t + 1} loss")
        strategies[t] = f
        losses[t] = x_t
        if col is not None:
            # reactive update: the adversary sees f_t only after the round
            y = col.step(1.0 - a.T @ f)
        f = agent.step(x_t)
    trace = Trace.from_rounds(strategies, losses)
    return trace, _adversary_series(config, trace, agent), unit


def run_self_play(config: SimulationConfig):
    """Mirror-play both sides of the game with the agent's update rule.

    Supports the multiplicative family (MWU, OMWU, AMWU).  Both players
    start uniform and the first two strategies coincide, after which each
    side updates from the opponent's current and previous strategies.
    Returns (trace_max, trace_min, series, game).
    """
    if config.agent.kind not in ("MWU", "OMWU", "AMWU"):
        raise ValueError(f"self-play supports MWU/OMWU/AMWU, got {config.agent.kind!r}")
    game = config.game.resolve()
    unit, _, _ = game.to_unit_range()
    a = unit.payoff
    n, m = unit.n, unit.m
    T = config.horizon
    eta = config.agent.eta
    alpha = config.agent.resolved_alpha()

    fs = np.empty((T, n))
    ys = np.empty((T, m))
    fs[0] = uniform(n)
    ys[0] = uniform(m)
    fs[1] = fs[0]
    ys[1] = ys[0]
    for t in range(2, T):
        fs[t] = amwu_step(fs[t - 1], unit, ys[t - 1], ys[t - 2], "max", eta, alpha)
        ys[t] = amwu_step(ys[t - 1], unit, fs[t - 1], fs[t - 2], "min", eta, alpha)

    loss_max = 1.0 - ys @ a.T
    loss_min = fs @ a
    for block in (loss_max, loss_min):
        if block.min() < -1e-9 or block.max() > 1.0 + 1e-9:
            raise AssertionError("self-play produced losses outside [0, 1]")
    trace_max = Trace.from_rounds(fs, loss_max)
    trace_min = Trace.from_rounds(ys, loss_min)

    series = {}
    for name in config.metrics:
        if name == "exploitability":
            series[name] = metrics.exploitability_series(unit, fs, ys)
        elif name == "kl_to_ne":
            ne = nash.solve_zero_sum(unit)
            series[name] = metrics.kl_series(
                (trace_max, trace_min), (ne.f_star, ne.y_star)
            )
        else:
            raise ValueError(f"unknown metric {name!r} for a self-play run")
    return trace_max, trace_min, series, unit


def _run_one(index: int, config: SimulationConfig) -> RunOutcome:
    out = RunOutcome(index=index, config=config)
    try:
        if config.adversary.kind == "self_play":
            _, _, series, _ = run_self_play(config)
        else:
            _, series, _ = run_vs_adversary(config)
        out.series = series
        out.stats = {
            name: {
                "final": float(vals[-1]),
                "mean": float(np.mean(vals)),
                "std": float(np.std(vals)),
            }
            for name, vals in series.items()
        }
    except Exception as exc:  # noqa: BLE001 - reported per config, others unaffected
        out.error = f"{type(exc).__name__}: {exc}"
    return out


def grid_run(configs, parallelism: int = 1) -> list[RunOutcome]:
    """Execute independent configs, preserving input order in the output.

    Each simulation is internally sequential and a pure function of its
    config, so results are identical for any parallelism level.
    """
    configs = list(configs)
    if parallelism < 1:
        raise ValueError(f"parallelism must be positive, got {parallelism}")
    if not configs:
        return []
    if parallelism == 1:
        return [_run_one(i, c) for i, c in enumerate(configs)]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = [pool.submit(_run_one, i, c) for i, c in enumerate(configs)]
        return [f.result() for f in futures]
