"""Command line entry point: build instances, run channel experiments and audits, write CSV.

Experiments read a flat ``key = value`` config (``#`` starts a comment). Each
trial plants a fresh codeword with seed ``master_seed + trial`` on a code that
is fixed by the config, decodes it, compares with the brute-force oracle when
the code is small enough, and becomes one CSV row.

Exit status: 0 success, 1 a soundness check, audit or theorem check failed,
2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .ael import (
    AELCode,
    OuterCode,
    PARAMETER_MODES,
    ael_membership,
    list_decode_ael,
    list_recover_ael,
    parameter_check,
)
from .expander import (
    BipartiteGraph,
    Subgraph,
    complete_bipartite,
    load_graph,
    measure_lambda,
    mixing_audit,
    random_biregular,
    save_graph,
)
from .gf_linear import (
    Field,
    LinearCode,
    load_code,
    min_distance,
    parity_code,
    random_linear_code,
    repetition_code,
    save_code,
)
from .factors import NetTooLarge
from .netsearch import FAMILY_MODES
from .oracle import LEMMA_IDS, AuditConfig, ChannelSpec, OracleTooLarge, global_list_oracle, lemma_audit, plant
from .regularity import cut_norm_exact, cut_norm_heuristic, exact_oracle, heuristic_oracle, regularity_decompose, MaskedMatrix
from .soundness import SoundnessError, certify
from .tanner import TannerCode, list_decode_tanner, tanner_membership, unique_decode_errors_erasures

CSV_HEADER = ("trial", "seed", "lambda", "beta", "list_size", "recovered", "missed", "extra", "wall_ms", "audit_min_slack")
EXPERIMENT_MODES = ("decode-unique", "decode-list-tanner", "decode-list-ael", "recover-list", "audit")
SEED_ENV = "EXPCODES_SEED"


class UsageError(ValueError):
    """Bad flags or config values; reported with the config schema and exit status 2."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "decode-list-tanner"
    graph: str = "random"  # random | complete | file:PATH
    n: int = 8
    d: int = 4
    graph_seed: int = 0
    q: int = 2
    c1: str = "parity"  # parity | repetition | random:K:SEED | gen:ROW;ROW | file:PATH
    c2: str = ""  # defaults to c1
    c_in: str = "random:2:0"
    c_out: str = "random:2:0"  # over length n·k_in
    beta: float = 0.1
    erasure: float = 0.0
    k: int = 1
    planted: int = 1
    eps: float = 0.1
    gamma: float | None = None
    eta: float | None = None
    K: int | str | None = None  # a number, or "observed" for AEL modes
    K2: int | None = None
    dec1: float | None = None
    dec2: float | None = None
    family_mode: str = "partition"
    oracle: str = "exact"  # cut-norm oracle: exact | heuristic
    restarts: int = 16
    net_cap: float = 1e7
    oracle_cap: int = 1 << 16
    trials: int = 10
    seed: int | None = None
    output: str = ""
    audit: tuple[str, ...] = ()  # lemma ids evaluated on every trial
    lemma: str = ""  # lemma id for mode=audit

    def validate(self) -> "ExperimentConfig":
        def need(ok: bool, what: str) -> None:
            if not ok:
                raise UsageError(what)

        need(self.mode in EXPERIMENT_MODES, f"mode must be one of {EXPERIMENT_MODES}")
        need(self.n >= 1 and 1 <= self.d <= self.n, "need 1 ≤ d ≤ n")
        need(self.graph in ("random", "complete") or self.graph.startswith("file:"), "graph must be random, complete or file:PATH")
        need(0 <= self.beta <= 1 and 0 <= self.erasure <= 1 and self.beta + self.erasure <= 1, "need beta, erasure in [0,1] with sum ≤ 1")
        need(self.eps > 0, "eps must be positive")
        need(self.k >= 1 and 1 <= self.planted <= self.k, "need 1 ≤ planted ≤ k")
        need(self.trials >= 0, "trials must be ≥ 0")
        need(self.family_mode in FAMILY_MODES, f"family_mode must be one of {FAMILY_MODES}")
        need(self.oracle in ("exact", "heuristic"), "oracle must be exact or heuristic")
        need(self.gamma is None or self.gamma > 0, "gamma must be positive")
        need(self.K is None or self.K == "observed" or (isinstance(self.K, int) and self.K >= 1), "K must be ≥ 1 or observed")
        need(self.K != "observed" or self.mode in ("decode-list-ael", "recover-list", "audit"), "K = observed applies to AEL modes")
        need(self.eta is None or self.eta > 0, "eta must be positive")
        need(self.net_cap > 0 and self.oracle_cap > 0 and self.restarts > 0, "caps and restarts must be positive")
        for lem in self.audit + ((self.lemma,) if self.lemma else ()):
            need(lem in LEMMA_IDS, f"unknown lemma id {lem!r}; expected one of {LEMMA_IDS}")
        need(self.mode != "audit" or bool(self.lemma), "mode=audit needs lemma = <id>")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "int | None":
            return None if raw.lower() == "none" else int(raw)
        if kind == "int | str | None":
            return None if raw.lower() == "none" else raw if raw == "observed" else int(raw)
        if kind == "float | None":
            return None if raw.lower() == "none" else float(raw)
        if kind == "tuple[str, ...]":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"{key}: cannot parse {raw!r}") from exc
    return raw


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``overrides`` (already typed) win over the file."""
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELD_TYPES:
            raise UsageError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values).validate()


def config_schema() -> str:
    lines = ["config keys (key = value, '#' comments):"]
    for f in fields(ExperimentConfig):
        lines.append(f"  {f.name:<12} {f.type:<16} default {f.default!r}")
    return "\n".join(lines)


def master_seed(cfg: ExperimentConfig) -> int:
    if cfg.seed is not None:
        return cfg.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


# ---------------------------------------------------------------------------
# building codes from a config


def parse_code(spec: str, q: int, length: int) -> LinearCode:
    field_ = Field(q)
    try:
        if spec == "parity":
            return parity_code(field_, length)
        if spec == "repetition":
            return repetition_code(field_, length)
        if spec.startswith("random:"):
            _, k, seed = spec.split(":")
            return random_linear_code(field_, length, int(k), int(seed))
        if spec.startswith("gen:"):
            rows = [[int(x) for x in row.split(",")] for row in spec[4:].split(";")]
            code = LinearCode.from_generator(field_, rows)
        elif spec.startswith("file:"):
            code = load_code(spec[5:])
        else:
            raise UsageError(f"unknown code spec {spec!r}")
    except (ValueError, OSError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"code {spec!r}: {exc}") from exc
    if code.n != length or code.q != q:
        raise UsageError(f"code {spec!r} has length {code.n} over GF({code.q}); expected {length} over GF({q})")
    return code


def build_graph(cfg: ExperimentConfig) -> BipartiteGraph:
    if cfg.graph == "complete":
        return complete_bipartite(cfg.n)
    if cfg.graph.startswith("file:"):
        try:
            return load_graph(cfg.graph[5:])
        except (ValueError, OSError) as exc:
            raise UsageError(f"graph {cfg.graph!r}: {exc}") from exc
    return random_biregular(cfg.n, cfg.d, cfg.graph_seed)


@lru_cache(maxsize=8)
def build_code(cfg: ExperimentConfig):
    G = build_graph(cfg)
    if cfg.mode in ("decode-unique", "decode-list-tanner") or (cfg.mode == "audit" and cfg.lemma in _TANNER_LEMMAS):
        c1 = parse_code(cfg.c1, cfg.q, G.d)
        c2 = parse_code(cfg.c2 or cfg.c1, cfg.q, G.d)
        return TannerCode(G, c1, c2)
    c_in = parse_code(cfg.c_in, cfg.q, G.d)
    base = parse_code(cfg.c_out, cfg.q, G.n * c_in.k)
    return AELCode(G, c_in, OuterCode(base, c_in.k))


_TANNER_LEMMAS = ("prop:local_presence", "lem:tanner-rigidity")


def _channel(cfg: ExperimentConfig) -> ChannelSpec:
    mode = cfg.mode
    if mode == "audit":
        mode = {
            "clm:local-membership": "decode-list-ael",
            "lem:ael-rigidity": "decode-list-ael",
            "clm:local-membership-lr": "recover-list",
            "lem:ael-rigidity-lr": "recover-list",
        }.get(cfg.lemma, "decode-list-tanner")
    kind = {"decode-unique": "erasure", "decode-list-tanner": "edge", "decode-list-ael": "block", "recover-list": "recovery"}[mode]
    return ChannelSpec(kind, cfg.beta, cfg.erasure if kind == "erasure" else 0.0, cfg.k, cfg.planted)


# ---------------------------------------------------------------------------
# trials


@dataclass
class TrialRecord:
    trial: int
    seed: int
    lam: float
    beta: float
    planted_distance: float
    list_size: int | None = None
    recovered: int | None = None
    missed: int | None = None
    extra: int | None = None
    wall_ms: float = 0.0
    audit_slacks: dict[str, float | None] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)  # reported on stderr, not failures

    @property
    def audit_min_slack(self) -> float | None:
        checked = [s for s in self.audit_slacks.values() if s is not None]
        return min(checked) if checked else None

    def row(self) -> list[str]:
        def fmt(x) -> str:
            if x is None:
                return ""
            if isinstance(x, float):
                return f"{x:.12g}"
            return str(x)

        return [fmt(x) for x in (self.trial, self.seed, self.lam, self.beta, self.list_size, self.recovered,
                                 self.missed, self.extra, round(self.wall_ms, 3), self.audit_min_slack)]


def _decoder_kwargs(cfg: ExperimentConfig) -> dict:
    oracle = exact_oracle() if cfg.oracle == "exact" else heuristic_oracle(restarts=cfg.restarts)
    return dict(oracle=oracle, gamma=cfg.gamma, eta=cfg.eta, family_mode=cfg.family_mode, net_cap=cfg.net_cap)


def _compare(words, oracle_words, h) -> tuple[int, int | None, int | None]:
    got = {np.asarray(w, dtype=np.int64).tobytes() for w in words}
    recovered = int(np.asarray(h, dtype=np.int64).tobytes() in got)
    if oracle_words is None:
        return recovered, None, None
    truth = {w.tobytes() for w in oracle_words}
    return recovered, len(truth - got), len(got - truth)


def _oracle_or_none(code, received, radius, metric, cap):
    try:
        return global_list_oracle(code, received, radius, metric, cap=cap)
    except OracleTooLarge:
        return None


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialRecord:
    seed = master_seed(cfg) + trial
    code = build_code(cfg)
    lam = code.graph.spectrum.lam
    inst = plant(code, _channel(cfg), seed)
    started = time.perf_counter()
    rec = TrialRecord(trial, seed, lam, cfg.beta, 0.0)
    try:
        _decode(cfg, code, inst, rec)
    except NetTooLarge as exc:
        rec.list_size = rec.recovered = rec.missed = rec.extra = None
        rec.notes.append(f"decoder skipped: {exc}")

    lemmas = (cfg.lemma,) if cfg.mode == "audit" else cfg.audit
    acfg = AuditConfig(eps=cfg.eps, beta=cfg.beta, gamma=cfg.gamma, eta=cfg.eta, K=cfg.K, K2=cfg.K2,
                       dec1=cfg.dec1, dec2=cfg.dec2, family_mode=cfg.family_mode, net_cap=cfg.net_cap)
    for lem in lemmas:
        report = lemma_audit(inst, lem, acfg)
        rec.audit_slacks[lem] = None if report.status == "precondition unmet" else report.slack
        if report.status == "fail":
            rec.failures.append(f"{lem}: slack {report.slack:.6g}")
    if rec.extra:
        rec.failures.append(f"{rec.extra} returned word(s) outside the oracle list")
    rec.wall_ms = (time.perf_counter() - started) * 1000
    return rec


def _decode(cfg: ExperimentConfig, code, inst, rec: TrialRecord) -> None:
    """Run the mode's decoder on the planted instance and fill the list columns of ``rec``."""
    lam = rec.lam
    mode = cfg.mode
    if mode == "decode-unique":
        rec.planted_distance = inst.received.errors_against(code, inst.h)
        res = unique_decode_errors_erasures(code, inst.received, cfg.eps)
        word = res.word
        rec.list_size = int(word is not None)
        rec.recovered = int(word is not None and np.array_equal(word, inst.h))
        rec.missed = 1 - rec.recovered
        rec.extra = int(word is not None and not rec.recovered)
        if word is not None:
            _soundness(lambda: tanner_membership(code, word), rec, "decode-unique returned a non-codeword")

    elif mode == "decode-list-tanner":
        g = inst.received
        rec.planted_distance = float(np.mean(g != inst.h))
        res = list_decode_tanner(code, g, cfg.eps, K1=cfg.K, K2=cfg.K2, dec1=cfg.dec1, dec2=cfg.dec2, lam=lam, **_decoder_kwargs(cfg))
        radius = res.stats["params"]["radius"]
        limit = math.floor(radius * g.size + 1e-9)
        for w in res.codewords:
            _soundness(lambda w=w: tanner_membership(code, w) and np.count_nonzero(w != g) <= limit, rec, "tanner list")
        truth = _oracle_or_none(code, g, radius, "hamming", cfg.oracle_cap)
        rec.list_size = len(res)
        rec.recovered, rec.missed, rec.extra = _compare(res.codewords, truth, inst.h)

    elif mode == "decode-list-ael":
        g = inst.received
        rec.planted_distance = float(np.mean(np.any(g != inst.h, axis=1)))
        res = list_decode_ael(code, g, cfg.beta, cfg.eps, K=cfg.K, lam=lam, **_decoder_kwargs(cfg))
        limit = math.floor(cfg.beta * code.n + 1e-9)
        for w in res.codewords:
            _soundness(lambda w=w: ael_membership(code, w) and int(np.any(w != g, axis=1).sum()) <= limit, rec, "ael list")
        truth = _oracle_or_none(code, g, cfg.beta, "right", cfg.oracle_cap)
        rec.list_size = len(res)
        rec.recovered, rec.missed, rec.extra = _compare(res.codewords, truth, inst.h)

    elif mode == "recover-list":
        inp = inst.received
        rec.planted_distance = inp.misses(inst.h) / code.n
        res = list_recover_ael(code, inp, cfg.beta, cfg.eps, K=cfg.K, lam=lam, **_decoder_kwargs(cfg))
        limit = math.floor(cfg.beta * code.n + 1e-9)
        for w in res.codewords:
            _soundness(lambda w=w: ael_membership(code, w) and inp.misses(w) <= limit, rec, "recovery list")
        truth = _oracle_or_none(code, inp, cfg.beta, "recovery", cfg.oracle_cap)
        rec.list_size = len(res)
        rec.recovered, rec.missed, rec.extra = _compare(res.codewords, truth, inst.h)


def _soundness(check, rec: TrialRecord, what: str) -> None:
    try:
        certify(bool(check()), what)
    except SoundnessError as exc:
        rec.failures.append(f"soundness: {exc}")


def _run_one(args: tuple[ExperimentConfig, int]) -> TrialRecord:
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[TrialRecord]:
    tasks = [(cfg, t) for t in range(cfg.trials)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, tasks))
    else:
        records = [_run_one(t) for t in tasks]
    return sorted(records, key=lambda r: r.trial)


def emit_csv(records: Sequence[TrialRecord], path: str | Path | None) -> str:
    """Write the fixed-schema CSV (to stdout when ``path`` is empty); returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in sorted(records, key=lambda r: r.trial):
        writer.writerow(rec.row())
    text = buf.getvalue()
    if path:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write CSV to {path}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return text


# ---------------------------------------------------------------------------
# subcommands


def _cmd_gen_graph(args) -> int:
    G = complete_bipartite(args.n) if args.complete else random_biregular(args.n, args.d, args.seed)
    prof = measure_lambda(G)
    if args.out:
        save_graph(G, args.out)
    print(f"n={G.n} d={G.d} lambda={prof.lam:.6g} sigma2={prof.sigma2:.6g}")
    return 0


def _cmd_gen_code(args) -> int:
    spec = {"random": f"random:{args.k}:{args.seed}", "parity": "parity", "repetition": "repetition"}[args.kind]
    code = parse_code(spec, args.q, args.n)
    if args.out:
        save_code(code, args.out)
    print(f"q={code.q} n={code.n} k={code.k} distance={min_distance(code)}")
    return 0


def _cmd_params(args) -> int:
    rep = parameter_check(args.eps, args.delta_dec, args.K, k=args.k, lam=args.lam, mode=args.mode,
                          K2=args.K2, delta1=args.delta1, delta2=args.delta2, alpha=args.alpha)
    print(f"gamma={rep.gamma:.6g}")
    print(rep.table())
    return 0


def _experiment(args, mode: str) -> int:
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    cfg = parse_config(text, mode=mode, seed=args.seed, trials=args.trials, output=args.out, **_extra(args))
    records = run_experiment(cfg, jobs=args.jobs)
    emit_csv(records, cfg.output)
    for r in records:
        for msg in r.notes:
            print(f"trial {r.trial}: {msg}", file=sys.stderr)
    failures = [(r.trial, f) for r in records for f in r.failures]
    for trial, msg in failures:
        print(f"trial {trial}: {msg}", file=sys.stderr)
    return 1 if failures else 0


def _extra(args) -> dict:
    return {"lemma": getattr(args, "lemma", None)}


def _cmd_audit(args) -> int:
    target = args.target
    if target == "mixing":
        bad = 0
        for i in range(args.graphs):
            G = random_biregular(args.n, args.d, args.seed + i)
            lam = measure_lambda(G).lam
            rep = mixing_audit(G, lam, args.trials, seed=args.seed + i)
            print(f"graph seed={args.seed + i} lambda={lam:.6g} trials={rep.trials} violations={rep.violations} max_excess={rep.max_excess:.6g}")
            bad += rep.violations
        return 1 if bad else 0
    if target == "regularity":
        return _audit_regularity(args)
    args.lemma = target
    return _experiment(args, "audit")


def _audit_regularity(args) -> int:
    G = random_biregular(args.n, args.d, args.seed)
    rng = np.random.default_rng(args.seed)
    oracle = exact_oracle() if args.oracle == "exact" else heuristic_oracle(restarts=16)
    failures = 0
    for t in range(args.trials):
        H = Subgraph(G, rng.random(G.num_edges) < 0.5)
        D = regularity_decompose(H, args.gamma, oracle)
        drops = np.diff(D.potentials)
        resid = abs(cut_norm_exact(MaskedMatrix(G, _residual_values(H, D))).value) if G.n <= 64 else float("nan")
        ok = (
            D.p <= 1 / (D.alpha * args.gamma) ** 2 + 1e-9
            and D.coefficient_mass <= 1 / (D.alpha * args.gamma) + 1e-9
            and all(-x >= (D.alpha * args.gamma) ** 2 - 1e-9 for x in drops)
            and (math.isnan(resid) or args.oracle != "exact" or resid <= args.gamma * G.num_edges + 1e-9)
        )
        failures += not ok
        print(f"trial={t} p={D.p} mass={D.coefficient_mass:.6g} residual={resid:.6g} ok={ok}")
    return 1 if failures else 0


def _residual_values(H: Subgraph, D) -> np.ndarray:
    G = H.parent
    values = H.mask.astype(float)
    for c, S, T in D.triples:
        s = np.zeros(G.n, dtype=bool)
        s[list(S)] = True
        t = np.zeros(G.n, dtype=bool)
        t[list(T)] = True
        values[s[G.edge_left] & t[G.edge_right]] -= c
    return values


def _cmd_bench(args) -> int:
    G = random_biregular(args.n, args.d, args.seed)
    H = Subgraph(G, np.random.default_rng(args.seed).random(G.num_edges) < 0.5)
    M = MaskedMatrix.of_subgraph(H)
    jobs = [
        ("measure_lambda", lambda: measure_lambda(G)),
        ("cut_norm_heuristic", lambda: cut_norm_heuristic(M)),
        ("regularity_decompose(heuristic)", lambda: regularity_decompose(H, args.gamma, heuristic_oracle())),
    ]
    if G.n <= 22:
        jobs.append(("cut_norm_exact", lambda: cut_norm_exact(M)))
    print(f"{'operation':<34}{'mean_ms':>10}{'max_ms':>10}")
    for name, fn in jobs:
        times = []
        for _ in range(args.reps):
            t0 = time.perf_counter()
            fn()
            times.append((time.perf_counter() - t0) * 1000)
        print(f"{name:<34}{np.mean(times):>10.2f}{max(times):>10.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expcodes", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-graph", help="sample a d-regular bipartite graph and report its lambda")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--d", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--complete", action="store_true")
    g.add_argument("--out", default="")
    g.set_defaults(func=_cmd_gen_graph)

    c = sub.add_parser("gen-code", help="build a linear code and report its distance")
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--kind", choices=("random", "parity", "repetition"), default="random")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default="")
    c.set_defaults(func=_cmd_gen_code)

    m = sub.add_parser("params", help="gamma, eta, net size and lambda thresholds")
    m.add_argument("--mode", choices=PARAMETER_MODES, default="ael-decode")
    m.add_argument("--eps", type=float, required=True)
    m.add_argument("--delta-dec", type=float, default=None)
    m.add_argument("--K", type=int, required=True)
    m.add_argument("--k", type=int, default=1)
    m.add_argument("--K2", type=int, default=None)
    m.add_argument("--delta1", type=float, default=None)
    m.add_argument("--delta2", type=float, default=None)
    m.add_argument("--lam", type=float, default=0.0)
    m.add_argument("--alpha", type=float, default=1.0)
    m.set_defaults(func=_cmd_params)

    def experiment_flags(sp) -> None:
        sp.add_argument("--config", default="")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--trials", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--jobs", type=int, default=1)

    u = sub.add_parser("decode-unique", help="errors-and-erasures decoding of Tanner codes")
    experiment_flags(u)
    u.set_defaults(func=lambda a: _experiment(a, "decode-unique"))

    dl = sub.add_parser("decode-list", help="list decoding experiment")
    dl.add_argument("family", choices=("tanner", "ael"))
    experiment_flags(dl)
    dl.set_defaults(func=lambda a: _experiment(a, f"decode-list-{a.family}"))

    r = sub.add_parser("recover-list", help="AEL list recovery experiment")
    experiment_flags(r)
    r.set_defaults(func=lambda a: _experiment(a, "recover-list"))

    au = sub.add_parser("audit", help="mixing, regularity or a lemma audit")
    au.add_argument("target", choices=("mixing", "regularity") + LEMMA_IDS)
    au.add_argument("--n", type=int, default=16)
    au.add_argument("--d", type=int, default=4)
    au.add_argument("--graphs", type=int, default=1)
    au.add_argument("--gamma", type=float, default=0.5)
    au.add_argument("--oracle", choices=("exact", "heuristic"), default="exact")
    experiment_flags(au)
    au.set_defaults(func=_cmd_audit)

    b = sub.add_parser("bench", help="time the core primitives on one graph")
    b.add_argument("--n", type=int, default=16)
    b.add_argument("--d", type=int, default=4)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--gamma", type=float, default=0.5)
    b.add_argument("--reps", type=int, default=3)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return int(exc.code or 0)
    if args.command == "gen-graph" and args.d is None:
        args.d = args.n if args.complete else None
        if args.d is None:
            parser.print_usage(sys.stderr)
            print("gen-graph: --d is required unless --complete", file=sys.stderr)
            return 2
    try:
        if args.command == "audit" and args.target in ("mixing", "regularity"):
            if args.trials is None:
                args.trials = 10_000 if args.target == "mixing" else 10
            if args.seed is None:
                args.seed = master_seed(ExperimentConfig())
        return int(args.func(args))
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(config_schema(), file=sys.stderr)
        return 2
    except (SoundnessError, AssertionError) as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
