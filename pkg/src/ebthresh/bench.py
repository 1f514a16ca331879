"""Simulation study: test signals plus shared Gaussian noise, scored by scaled SSE."""

import csv
import io
import json
import os
import platform
import re
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, signals
from .core import Rule
from .denoise import DenoiseConfig, Transform, denoise, levelwise_fit, transform
from .priors import Gaussian, Laplace, QuasiCauchy

NOISE_RATIOS = {"high": 1.0 / 3.0, "low": 1.0 / 7.0}

_PRIORS = {"laplace": Laplace, "cauchy": QuasiCauchy, "gaussian": Gaussian}
_METHOD_RE = re.compile(
    r"^(?:(?P<tr>ti|dwt):)?(?:"
    r"(?P<prior>laplace|cauchy|gaussian)-(?P<rule>median|mean|hard|soft)"
    r"|(?P<base>sure4|sure6|universal6)"
    r"|fdr(?P<q>[0-9.]+)"
    r"|(?P<truth>truth))$"
)


@dataclass(frozen=True)
class Method:
    """A parsed method descriptor such as ``ti:laplace-median`` or ``dwt:fdr0.05``.

    Laplace and Gaussian slabs estimate their scale jointly with the weight.
    ``truth`` returns the noiseless signal and is only useful as a check.
    """

    label: str
    config: Optional[DenoiseConfig]

    @classmethod
    def parse(cls, text: str, wavelet: str = "sym8", coarsest: int = 4) -> "Method":
        m = _METHOD_RE.match(text.strip().lower())
        if m is None:
            raise ValueError(f"invalid method descriptor {text!r}")
        if m["truth"]:
            return cls("truth", None)
        tr = Transform(m["tr"] or "ti")
        common = dict(transform=tr, wavelet=wavelet, coarsest_level=coarsest)
        if m["prior"]:
            prior = _PRIORS[m["prior"]]()
            cfg = DenoiseConfig(prior=prior, rule=Rule(m["rule"]),
                                estimate_scale=not isinstance(prior, QuasiCauchy), **common)
            name = f"{m['prior']}-{m['rule']}"
        elif m["base"]:
            cfg = DenoiseConfig(baseline=m["base"], **common)
            name = m["base"]
        else:
            q = float(m["q"])
            cfg = DenoiseConfig(baseline="fdr", q=q, **common)
            name = f"fdr{m['q']}"
        return cls(f"{tr.value}:{name}", cfg)


@dataclass(frozen=True)
class SimulationSpec:
    signals: Tuple[str, ...] = signals.SIGNAL_NAMES
    n: int = 1024
    noise: str = "high"
    reps: int = 100
    seed: int = 0
    methods: Tuple[str, ...] = ("ti:laplace-median",)
    wavelet: str = "sym8"
    coarsest: int = 4

    def __post_init__(self):
        object.__setattr__(self, "signals", tuple(self.signals))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.noise not in NOISE_RATIOS:
            raise ValueError(f"noise must be one of {sorted(NOISE_RATIOS)}")
        if self.n < 2 ** (self.coarsest + 1) or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two of at least {2 ** (self.coarsest + 1)}")
        if self.reps < 1:
            raise ValueError("reps must be positive")
        for s in self.signals:
            if s not in signals.SIGNAL_NAMES:
                raise ValueError(f"unknown test signal {s!r}")

    @property
    def sigma_e(self) -> float:
        return NOISE_RATIOS[self.noise]


def scaled_sse(estimate, truth, sigma_e: float) -> float:
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValueError("estimate and truth differ in length")
    if not sigma_e > 0:
        raise ValueError("sigma_e must be positive")
    return float(np.sum((estimate - truth) ** 2) / sigma_e**2)


@dataclass
class SimulationReport:
    spec: SimulationSpec
    methods: List[str]
    signals: List[str]
    sse: np.ndarray  # methods x signals x reps
    reference: Optional[str] = None
    extra: Dict = field(default_factory=dict)

    @property
    def mean(self) -> np.ndarray:
        return self.sse.mean(axis=2)

    @property
    def stderr(self) -> np.ndarray:
        reps = self.sse.shape[2]
        if reps < 2:
            return np.full(self.sse.shape[:2], np.nan)
        return self.sse.std(axis=2, ddof=1) / np.sqrt(reps)

    def value(self, method: str, signal: str) -> float:
        return float(self.mean[self.methods.index(method), self.signals.index(signal)])

    def paired(self, reference: Optional[str] = None) -> List[dict]:
        """Mean difference from ``reference`` in units of its matched-pair SE."""
        ref = reference or self.reference or self.methods[0]
        r = self.methods.index(ref)
        out = []
        reps = self.sse.shape[2]
        for i, m in enumerate(self.methods):
            if i == r:
                continue
            for k, s in enumerate(self.signals):
                d = self.sse[i, k] - self.sse[r, k]
                se = d.std(ddof=1) / np.sqrt(reps) if reps > 1 else np.nan
                out.append({
                    "method": m, "reference": ref, "signal": s,
                    "mean_diff": float(d.mean()), "se": float(se),
                    "z": float(d.mean() / se) if se > 0 else float("nan"),
                })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method"] + self.signals)
        for i, m in enumerate(self.methods):
            w.writerow([m] + [f"{v:.6f}" for v in self.mean[i]])
        return buf.getvalue()

    def to_json(self) -> str:
        table = [
            {"method": m, "signal": s, "mean": float(self.mean[i, k]),
             "stderr": float(self.stderr[i, k])}
            for i, m in enumerate(self.methods) for k, s in enumerate(self.signals)
        ]
        doc = {
            "spec": asdict(self.spec),
            "table": table,
            "paired": self.paired(),
            "created": _created(),
            "versions": {"ebthresh": __version__, "numpy": np.__version__,
                         "python": platform.python_version()},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _created() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for reproducible report bytes.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.replace(microsecond=0).isoformat()


def replication_noise(seed: int, reps: int, n: int) -> List[np.ndarray]:
    """One standard normal vector per replication, from independent substreams."""
    children = np.random.SeedSequence(seed).spawn(reps)
    return [np.random.default_rng(c).standard_normal(n) for c in children]


def _fit_key(cfg: DenoiseConfig):
    if cfg.baseline is not None:
        return None
    return replace(cfg, rule=Rule.MEDIAN)


def _one_replication(spec: SimulationSpec, methods: Sequence[Method], noise: np.ndarray,
                     truths: Dict[str, np.ndarray]) -> np.ndarray:
    out = np.empty((len(methods), len(spec.signals)))
    for k, s in enumerate(spec.signals):
        f = truths[s]
        y = f + spec.sigma_e * noise
        shared = {}
        for i, m in enumerate(methods):
            if m.config is None:
                est = f
            else:
                key = _fit_key(m.config)
                fits = shared.get(key) if key is not None else None
                if key is not None and fits is None:
                    fits = shared[key] = levelwise_fit(transform(y, m.config), m.config)
                est = denoise(y, m.config, fits=fits).estimate
            out[i, k] = scaled_sse(est, f, spec.sigma_e)
    return out


def run_simulation(spec: SimulationSpec, jobs: int = 1, progress=None) -> SimulationReport:
    """Run every method on every signal for ``spec.reps`` shared-noise replications.

    Replications are independent; with ``jobs > 1`` they run in worker
    processes and are reassembled in replication order, so the report does
    not depend on scheduling.
    """
    methods = [Method.parse(m, spec.wavelet, spec.coarsest) for m in spec.methods]
    truths = {s: signals.test_function(s, spec.n) for s in spec.signals}
    noises = replication_noise(spec.seed, spec.reps, spec.n)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_one_replication, [spec] * spec.reps, [methods] * spec.reps,
                                  noises, [truths] * spec.reps))
    else:
        results = []
        for r, e in enumerate(noises):
            results.append(_one_replication(spec, methods, e, truths))
            if progress is not None:
                progress(r + 1, spec.reps)
    sse = np.stack(results, axis=2)
    labels = [m.label for m in methods]
    ref = "ti:laplace-median" if "ti:laplace-median" in labels else labels[0]
    return SimulationReport(spec, labels, list(spec.signals), sse, reference=ref)
