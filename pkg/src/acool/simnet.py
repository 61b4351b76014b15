"""Deterministic adversarial network simulator.

Messages between nodes become queue events; a seeded scheduler picks the
next delivery under one of three policies (uniform random, LIFO-biased,
adversary-directed), with an aging rule forcing any event older than the
fairness window to deliver first, so every message to a live honest node
is eventually delivered no matter the policy.

Byzantine nodes are driven by strategy objects that control only their
outbound messages; most strategies wrap one or two honest replicas and
corrupt, drop, or split the replica's traffic.  Runs are reproducible
byte-for-byte from (config, seed): all randomness flows from seeded
generators and every iteration order is fixed.

Metrics account payload bits per message tag for honest senders only
(Byzantine and binary-agreement side-channel bits are opt-in), per-node
egress, decode attempts, and the causal-round depth (longest message
chain) reached at honest termination.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .aba import CoinAbba, CoinOracle, OracleAbba, OracleAdjudicator, ORACLE_ID
from .field_ecc import CodeParams, params_for_message_bits
from .messages import (
    AbbaIn, AbbaOut, Aux, CorrectSymbol, Decide, Est, Initial, Leader,
    LeaderMessage, NewSymbol, Ready, Shmdm, Si, Symbol, payload_bits, tag_of,
)
from .protocol import BOTTOM, AcoolNode
from .rba_rbc import RbaNode, RbcNode
from .small_t import SmallTNode, committee_size

PROTOCOLS = ("acool", "rba", "rbc", "small_t")
ADVERSARIES = (
    "crash_silent", "equivocate_symbols", "garbage_shares",
    "withhold_from_subset", "split_input_builder", "ready_spammer",
    "random_byzantine",
)
SCHEDULERS = ("uniform", "lifo", "adversary")


class EventCapExceeded(Exception):
    """Raised by callers that treat a liveness failure as fatal."""


def _subseed(seed: int, label: str) -> int:
    h = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(h[:8], "big")


@dataclass
class SimConfig:
    """One reproducible run: topology, protocol wiring, adversary, scheduling."""

    n: int
    t: int
    seed: int = 0
    msg_len_bits: int = 256
    protocol: str = "acool"
    adversary: str = "none"
    scheduler: str = "uniform"
    inputs: Optional[dict] = None          # node id -> bytes (missing = no input)
    byzantine: Optional[tuple] = None      # explicit ids; default: last t
    abba: str = "oracle"                   # oracle | coin
    abba_hint: int = 0
    skip_brba: bool = False
    count_abba_bits: bool = False
    count_byzantine_bits: bool = False
    legacy_cool: bool = False
    leader: int = 1
    balanced: bool = True
    adversary_targets: Optional[tuple] = None
    event_cap: int = 1_000_000
    fairness_window: Optional[int] = None

    def validate(self):
        if self.n < 3 * self.t + 1:
            from .field_ecc import ResilienceViolation

            raise ResilienceViolation(f"need n >= 3t+1, got n={self.n}, t={self.t}")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.adversary != "none" and self.adversary not in ADVERSARIES:
            raise ValueError(f"unknown adversary {self.adversary!r}")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.scheduler!r}")
        if self.abba not in ("oracle", "coin"):
            raise ValueError(f"unknown abba kind {self.abba!r}")
        byz = self.byzantine_ids()
        if len(byz) > self.t:
            raise ValueError("more Byzantine nodes than the fault bound")
        if any(i < 1 or i > self.n for i in byz):
            raise ValueError("Byzantine id outside 1..n")
        if self.protocol == "rbc" and not 1 <= self.leader <= self.n:
            raise ValueError("leader outside 1..n")

    def byzantine_ids(self) -> tuple:
        if self.byzantine is not None:
            return tuple(sorted(self.byzantine))
        if self.adversary == "none":
            return ()
        if self.protocol == "small_t":
            np = committee_size(self.t)
            return tuple(range(np - self.t + 1, np + 1))
        return tuple(range(self.n - self.t + 1, self.n + 1))

    def window(self) -> int:
        return self.fairness_window or 8 * self.n * self.n

    def default_message(self, salt: int = 0) -> bytes:
        nbytes = max(1, self.msg_len_bits // 8)
        base = _subseed(self.seed, f"msg{salt}")
        return bytes((base + 37 * i) % 256 for i in range(nbytes))

    def effective_inputs(self) -> dict:
        if self.inputs is not None:
            return dict(self.inputs)
        w = self.default_message()
        if self.protocol == "rbc":
            return {self.leader: w}
        return {i: w for i in range(1, self.n + 1)}

    def to_dict(self) -> dict:
        d = {
            "n": self.n, "t": self.t, "seed": self.seed,
            "msg_len_bits": self.msg_len_bits, "protocol": self.protocol,
            "adversary": self.adversary, "scheduler": self.scheduler,
            "abba": self.abba, "abba_hint": self.abba_hint,
            "skip_brba": self.skip_brba, "count_abba_bits": self.count_abba_bits,
            "count_byzantine_bits": self.count_byzantine_bits,
            "legacy_cool": self.legacy_cool, "leader": self.leader,
            "balanced": self.balanced, "event_cap": self.event_cap,
            "fairness_window": self.window(),
            "byzantine": list(self.byzantine_ids()),
            "adversary_targets": sorted(self.adversary_targets or ()),
            "inputs": {str(k): v.hex()
                       for k, v in sorted(self.effective_inputs().items())
                       if v is not None},
        }
        return d


# ---------------------------------------------------------------------------
# event queue
# ---------------------------------------------------------------------------


class _Queue:
    """Pending deliveries with O(1) policy picks and an aging guarantee."""

    def __init__(self, rng: random.Random, policy: str, victims: frozenset,
                 window: int):
        self.rng = rng
        self.policy = policy
        self.victims = victims
        self.window = window
        self.events: dict = {}
        self.age: deque = deque()
        self.stack: list = []
        self.ids: list = []
        self.pos: dict = {}
        self.pref_ids: list = []             # non-victim targets, adversary policy
        self.pref_pos: dict = {}
        self.next_id = 0

    def __len__(self):
        return len(self.events)

    def push(self, step: int, frm: int, dst: int, msg, rnd: int):
        eid = self.next_id
        self.next_id += 1
        self.events[eid] = (step, frm, dst, msg, rnd)
        self.age.append(eid)
        self.stack.append(eid)
        self.pos[eid] = len(self.ids)
        self.ids.append(eid)
        if self.policy == "adversary" and dst not in self.victims:
            self.pref_pos[eid] = len(self.pref_ids)
            self.pref_ids.append(eid)

    def _remove(self, eid: int):
        idx = self.pos.pop(eid)
        last = self.ids.pop()
        if last != eid:
            self.ids[idx] = last
            self.pos[last] = idx
        if eid in self.pref_pos:
            idx = self.pref_pos.pop(eid)
            last = self.pref_ids.pop()
            if last != eid:
                self.pref_ids[idx] = last
                self.pref_pos[last] = idx
        return self.events.pop(eid)

    def pop(self, step: int):
        # aging: anything past the fairness window is delivered first
        while self.age and self.age[0] not in self.events:
            self.age.popleft()
        if self.age:
            oldest = self.age[0]
            if step - self.events[oldest][0] > self.window:
                self.age.popleft()
                return self._remove(oldest)
        if self.policy == "lifo" and self.rng.random() < 0.9:
            while self.stack and self.stack[-1] not in self.events:
                self.stack.pop()
            if self.stack:
                return self._remove(self.stack.pop())
        if self.policy == "adversary" and self.pref_ids:
            eid = self.pref_ids[self.rng.randrange(len(self.pref_ids))]
            return self._remove(eid)
        eid = self.ids[self.rng.randrange(len(self.ids))]
        return self._remove(eid)


# ---------------------------------------------------------------------------
# adversary strategies
# ---------------------------------------------------------------------------


class _AdvCtx:
    __slots__ = ("self_id", "n", "t", "params", "rng", "targets", "fresh_node")

    def __init__(self, self_id, n, t, params, rng, targets, fresh_node):
        self.self_id = self_id
        self.n = n
        self.t = t
        self.params = params
        self.rng = rng
        self.targets = targets
        self.fresh_node = fresh_node


class Strategy:
    """Controls one Byzantine node's outbound traffic."""

    def __init__(self, ctx: _AdvCtx):
        self.ctx = ctx

    def on_start(self, w: Optional[bytes]):
        return []

    def on_deliver(self, frm: int, msg):
        return []

    def _rand_elems(self):
        p = self.ctx.params
        return tuple(self.ctx.rng.randrange(p.q) for _ in range(p.chunks))


class CrashSilent(Strategy):
    """Sends nothing at all."""


class _Replica(Strategy):
    """Base for strategies that corrupt an honest replica's traffic."""

    def __init__(self, ctx):
        super().__init__(ctx)
        self.node = ctx.fresh_node(ctx.self_id)

    def on_start(self, w):
        if w is None:
            return []
        return self._rewrite(self.node.input(w))

    def on_deliver(self, frm, msg):
        if self.node.is_terminated():
            return []
        return self._rewrite(self.node.handle(frm, msg))

    def _rewrite(self, sends):
        return sends


class GarbageShares(_Replica):
    """Honest control flow, random garbage in every coded payload."""

    def _rewrite(self, sends):
        out = []
        for dst, msg in sends:
            if isinstance(msg, Symbol):
                msg = Symbol(msg.inst, (self._rand_elems(), self._rand_elems()))
            elif isinstance(msg, NewSymbol):
                msg = NewSymbol(self._rand_elems())
            elif isinstance(msg, CorrectSymbol):
                msg = CorrectSymbol(self._rand_elems())
            elif isinstance(msg, (Leader, Initial)):
                msg = type(msg)(self._rand_elems())
            elif isinstance(msg, Shmdm) and msg.elems is not None:
                msg = Shmdm(self._rand_elems())
            out.append((dst, msg))
        return out


class WithholdFromSubset(_Replica):
    """Honest behavior, but nothing is ever sent to the target subset."""

    def _rewrite(self, sends):
        targets = self.ctx.targets
        return [(dst, msg) for dst, msg in sends if dst not in targets]


class _TwoFaced(Strategy):
    """Two honest replicas with different inputs, split across recipients."""

    drop_phase2 = False

    def __init__(self, ctx):
        super().__init__(ctx)
        self.node_a = ctx.fresh_node(ctx.self_id)
        self.node_b = ctx.fresh_node(ctx.self_id)

    def _side_a(self, dst: int) -> bool:
        return dst <= self.ctx.n // 2 or dst == ORACLE_ID

    def _merge(self, sa, sb):
        out = [(dst, msg) for dst, msg in sa if self._side_a(dst)]
        out += [(dst, msg) for dst, msg in sb if not self._side_a(dst)]
        if self.drop_phase2:
            out = [(d, m) for d, m in out
                   if not (isinstance(m, Si) and m.phase == 2)]
        return out

    def on_start(self, w):
        if w is None:
            w = bytes(max(1, self.ctx.params.capacity_bits // 8 - 5))
        alt = bytes(b ^ 0xFF for b in w)
        return self._merge(self.node_a.input(w), self.node_b.input(alt))

    def on_deliver(self, frm, msg):
        sa = [] if self.node_a.is_terminated() else self.node_a.handle(frm, msg)
        sb = [] if self.node_b.is_terminated() else self.node_b.handle(frm, msg)
        return self._merge(sa, sb)


class EquivocateSymbols(_TwoFaced):
    """Classic split-world equivocation between the two recipient halves."""


class SplitInputBuilder(_TwoFaced):
    """Equivocate and additionally withhold all phase-2 indicators."""

    drop_phase2 = True


class ReadySpammer(_Replica):
    """Honest replica plus a budget of spurious READY and indicator spam."""

    def __init__(self, ctx):
        super().__init__(ctx)
        self.budget = 4 * ctx.n

    def _rewrite(self, sends):
        rng = self.ctx.rng
        out = list(sends)
        if self.budget > 0:
            out.append((rng.randrange(1, self.ctx.n + 1), Ready(rng.randrange(2))))
            out.append((rng.randrange(1, self.ctx.n + 1),
                        Si(rng.randrange(3), rng.randrange(1, 3), rng.randrange(2))))
            self.budget -= 2
        return out


class RandomByzantine(Strategy):
    """Well-typed chaos: random messages to random peers, bounded budget."""

    def __init__(self, ctx):
        super().__init__(ctx)
        self.budget = 8 * ctx.n

    def _spray(self):
        rng = self.ctx.rng
        out = []
        for _ in range(min(2, self.budget)):
            self.budget -= 1
            dst = rng.randrange(1, self.ctx.n + 1)
            kind = rng.randrange(8)
            if kind == 0:
                msg = Symbol(rng.randrange(3), (self._rand_elems(), self._rand_elems()))
            elif kind == 1:
                msg = Si(rng.randrange(3), rng.randrange(1, 3), rng.randrange(2))
            elif kind == 2:
                msg = Ready(rng.randrange(2))
            elif kind == 3:
                msg = NewSymbol(self._rand_elems())
            elif kind == 4:
                msg = CorrectSymbol(self._rand_elems())
            elif kind == 5:
                msg = Est(rng.randrange(3), rng.randrange(2))
            elif kind == 6:
                msg = Aux(rng.randrange(3), rng.randrange(2))
            else:
                msg = Decide(rng.randrange(2))
            out.append((dst, msg))
        return out

    def on_start(self, w):
        return self._spray()

    def on_deliver(self, frm, msg):
        return self._spray()


_STRATEGIES = {
    "crash_silent": CrashSilent,
    "equivocate_symbols": EquivocateSymbols,
    "garbage_shares": GarbageShares,
    "withhold_from_subset": WithholdFromSubset,
    "split_input_builder": SplitInputBuilder,
    "ready_spammer": ReadySpammer,
    "random_byzantine": RandomByzantine,
}


# ---------------------------------------------------------------------------
# metrics and report
# ---------------------------------------------------------------------------


@dataclass
class Metrics:
    bits_by_tag: dict = field(default_factory=dict)
    total_bits: int = 0
    ideal_total_bits: float = 0.0
    egress: dict = field(default_factory=dict)
    egress_by_tag: dict = field(default_factory=dict)
    max_causal_round: int = 0
    decode_attempts: int = 0
    events_delivered: int = 0
    events_suppressed: int = 0
    abba_instances: int = 0

    def to_dict(self) -> dict:
        return {
            "bits_by_tag": dict(sorted(self.bits_by_tag.items())),
            "total_bits": self.total_bits,
            "ideal_total_bits": round(self.ideal_total_bits, 3),
            "egress": {str(k): v for k, v in sorted(self.egress.items())},
            "egress_by_tag": {
                str(node): dict(sorted(tags.items()))
                for node, tags in sorted(self.egress_by_tag.items())
            },
            "max_causal_round": self.max_causal_round,
            "decode_attempts": self.decode_attempts,
            "events_delivered": self.events_delivered,
            "events_suppressed": self.events_suppressed,
            "abba_instances": self.abba_instances,
        }

    def csv_row(self, config: "SimConfig") -> str:
        return ",".join(str(x) for x in (
            config.protocol, config.n, config.t, config.msg_len_bits,
            config.adversary, config.scheduler, config.seed,
            self.total_bits, self.max_causal_round, self.decode_attempts,
            self.events_delivered,
        ))


CSV_HEADER = ("protocol,n,t,msg_len_bits,adversary,scheduler,seed,"
              "total_bits,max_causal_round,decode_attempts,events_delivered")


@dataclass
class RunReport:
    config: dict
    reason: str                      # ok | deadlock | cap
    outputs: dict                    # id -> {"terminated", "output", "bottom"}
    checks: dict
    metrics: Metrics
    event_log: list
    flags: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.reason == "ok" and all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "reason": self.reason,
            "outputs": {str(k): v for k, v in sorted(self.outputs.items())},
            "checks": dict(sorted(self.checks.items())),
            "flags": dict(sorted(self.flags.items())),
            "metrics": self.metrics.to_dict(),
            "events": len(self.event_log),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def log_ndjson(self) -> str:
        rows = []
        for step, frm, dst, tag, bits, rnd in self.event_log:
            rows.append(json.dumps(
                {"step": step, "from": frm, "to": dst, "tag": tag,
                 "bits": bits, "round": rnd},
                sort_keys=True, separators=(",", ":")))
        return "\n".join(rows)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _make_params(config: SimConfig) -> CodeParams:
    if config.protocol == "small_t":
        return params_for_message_bits(
            committee_size(config.t), config.t, config.msg_len_bits)
    return params_for_message_bits(config.n, config.t, config.msg_len_bits)


def run(config: SimConfig, strict: bool = False) -> RunReport:
    """Execute one seeded run to termination, deadlock, or the event cap.

    With ``strict`` a liveness failure raises EventCapExceeded instead of
    being reported in the ``reason`` field.
    """
    config.validate()
    params = _make_params(config)
    byz = frozenset(config.byzantine_ids())
    honest = [i for i in range(1, config.n + 1) if i not in byz]
    coin = CoinOracle(_subseed(config.seed, "coin"))
    abba_count = [0]

    def abba_for(node_id, counted=True):
        if counted:
            abba_count[0] += 1
        if config.abba == "coin":
            return CoinAbba(node_id, params.n, config.t, coin)
        return OracleAbba(node_id)

    def build_node(node_id, counted=True):
        if config.protocol == "acool":
            return AcoolNode(node_id, params, abba_for(node_id, counted),
                             skip_brba=config.skip_brba, legacy=config.legacy_cool)
        if config.protocol == "rba":
            return RbaNode(node_id, params)
        if config.protocol == "rbc":
            return RbcNode(node_id, params, config.leader, config.balanced)
        abba = (abba_for(node_id, counted)
                if node_id <= params.n else None)
        return SmallTNode(node_id, config.n, params, abba)

    nodes = {i: build_node(i) for i in honest}

    targets = frozenset(config.adversary_targets
                        or tuple(honest[: config.t + 1]))
    strategies = {}
    for b in sorted(byz):
        ctx = _AdvCtx(
            b, config.n, config.t, params,
            random.Random(_subseed(config.seed, f"adv{b}")),
            targets, lambda nid: build_node(nid, counted=False))
        strategies[b] = _STRATEGIES[config.adversary](ctx)

    participants = None
    adjudicator = None
    if config.abba == "oracle" and config.protocol in ("acool", "small_t"):
        scope = params.n if config.protocol == "small_t" else config.n
        participants = [i for i in honest if i <= scope]
        adjudicator = OracleAdjudicator(participants, config.abba_hint)

    queue = _Queue(random.Random(_subseed(config.seed, "sched")),
                   config.scheduler, frozenset(targets), config.window())
    metrics = Metrics()
    depth = {i: 0 for i in range(0, config.n + 1)}
    term_depth: dict = {}
    event_log: list = []
    step = 0

    # idealized symbol width: exact k = t/3 (no integer clamp, no chunk
    # rounding), reported alongside the raw accounting for comparison
    k_ideal = config.t / 3 if config.t >= 1 else 1.0
    ideal_cb = max(config.msg_len_bits / k_ideal,
                   math.log2(params.q))

    def ideal_bits_of(msg) -> float:
        if isinstance(msg, Symbol):
            return 2 * ideal_cb
        if isinstance(msg, (NewSymbol, CorrectSymbol, Leader, Initial)):
            return ideal_cb
        if isinstance(msg, Shmdm):
            return ideal_cb if msg.elems is not None else 1
        return payload_bits(msg, params)

    def enqueue(frm: int, sends):
        rnd = depth[frm] + 1
        for dst, msg in sends:
            queue.push(step, frm, dst, msg, rnd)
            counted = (frm in nodes or frm == ORACLE_ID
                       or (frm in byz and config.count_byzantine_bits))
            if isinstance(msg, (AbbaIn, AbbaOut)) and not config.count_abba_bits:
                counted = False
            if counted:
                bits = payload_bits(msg, params)
                tag = tag_of(msg)
                metrics.bits_by_tag[tag] = metrics.bits_by_tag.get(tag, 0) + bits
                metrics.total_bits += bits
                metrics.ideal_total_bits += ideal_bits_of(msg)
                metrics.egress[frm] = metrics.egress.get(frm, 0) + bits
                tags = metrics.egress_by_tag.setdefault(frm, {})
                tags[tag] = tags.get(tag, 0) + bits

    # feed inputs in id order; committee outsiders never input
    inputs = config.effective_inputs()
    for i in range(1, config.n + 1):
        w = inputs.get(i)
        if config.protocol == "small_t" and i > params.n:
            continue
        if i in nodes:
            if w is not None:
                enqueue(i, nodes[i].input(w))
        elif i in strategies:
            enqueue(i, strategies[i].on_start(w))

    terminated = {i for i in nodes if nodes[i].is_terminated()}
    reason = "cap"
    while step < config.event_cap:
        if len(terminated) == len(nodes):
            reason = "ok"
            break
        if not queue:
            reason = "deadlock"
            break
        enq_step, frm, dst, msg, rnd = queue.pop(step)
        step += 1
        if dst == ORACLE_ID:
            if adjudicator is not None and isinstance(msg, AbbaIn):
                depth[ORACLE_ID] = max(depth[ORACLE_ID], rnd)
                decided = adjudicator.on_input(frm, msg.bit)
                metrics.events_delivered += 1
                if decided is not None:
                    enqueue(ORACLE_ID,
                            [(p, AbbaOut(decided)) for p in participants])
            continue
        if dst in nodes:
            node = nodes[dst]
            if node.is_terminated():
                metrics.events_suppressed += 1
                continue
            depth[dst] = max(depth[dst], rnd)
            sends = node.handle(frm, msg)
            metrics.events_delivered += 1
            event_log.append((step, frm, dst, tag_of(msg),
                              payload_bits(msg, params), rnd))
            enqueue(dst, sends)
            if node.is_terminated():
                terminated.add(dst)
                term_depth[dst] = depth[dst]
        elif dst in strategies:
            depth[dst] = max(depth[dst], rnd)
            metrics.events_delivered += 1
            event_log.append((step, frm, dst, tag_of(msg),
                              payload_bits(msg, params), rnd))
            enqueue(dst, strategies[dst].on_deliver(frm, msg))
    if len(terminated) == len(nodes):
        reason = "ok"

    metrics.max_causal_round = max(term_depth.values(), default=0)
    metrics.abba_instances = abba_count[0]
    metrics.decode_attempts = sum(_decode_attempts(nodes[i]) for i in nodes)

    outputs = {}
    for i in sorted(nodes):
        out = nodes[i].poll_output()
        outputs[i] = {
            "terminated": nodes[i].is_terminated(),
            "output": out.hex() if isinstance(out, bytes) else None,
            "bottom": out is BOTTOM,
        }

    checks = _run_checks(config, nodes, inputs, byz, reason)
    flags = {
        "abba_input_races": sum(
            1 for v in nodes.values() if getattr(v, "abba_race", False)),
        "vote_collisions": sum(
            1 for v in nodes.values()
            for _, b in _bua_instances(v) if b.vote_collision),
        "quorum_collisions": sum(
            1 for v in nodes.values()
            if getattr(v, "quorum_collision", False)),
    }
    report = RunReport(config.to_dict(), reason, outputs, checks, metrics,
                       event_log, flags)
    if strict and reason != "ok":
        raise EventCapExceeded(f"liveness failure: {reason} after {step} events")
    return report


def _decode_attempts(node) -> int:
    total = 0
    for acc in _accumulators(node):
        total += acc.attempts
    return total


def _accumulators(node):
    if isinstance(node, AcoolNode):
        return [node.oec_new, node.oec_final]
    if isinstance(node, RbaNode):
        return [node.oec_final]
    if isinstance(node, RbcNode):
        return [node.initial_acc, node.inner.oec_final]
    if isinstance(node, SmallTNode):
        accs = [node.oec]
        if node.inner is not None:
            accs += [node.inner.oec_new, node.inner.oec_final]
        return accs
    return []


def _bua_instances(node):
    if isinstance(node, AcoolNode):
        pairs = [(1, node.bua1)]
        if not node.legacy:
            pairs.append((2, node.bua2))
        return pairs
    if isinstance(node, RbaNode):
        return [(0, node.bua)]
    if isinstance(node, RbcNode):
        return [(0, node.inner.bua)]
    if isinstance(node, SmallTNode) and node.inner is not None:
        return [(1, node.inner.bua1), (2, node.inner.bua2)]
    return []


def _run_checks(config, nodes, inputs, byz, reason) -> dict:
    """Post-hoc safety and agreement assertions over honest final states."""
    outs = []
    for i, node in nodes.items():
        if node.is_terminated():
            out = node.poll_output()
            outs.append("\x00bottom" if out is BOTTOM else out)
    consistency = len(set(outs)) <= 1

    honest_inputs = {inputs.get(i) for i in nodes}
    validity = True
    validity_applicable = False
    expected = None
    if config.protocol == "rbc":
        if config.leader in nodes and inputs.get(config.leader):
            validity_applicable = True
            expected = inputs[config.leader]
    elif len(honest_inputs) == 1 and None not in honest_inputs:
        validity_applicable = True
        (expected,) = honest_inputs
    if validity_applicable:
        validity = all(o == expected for o in outs)
        if reason == "ok":
            validity = validity and len(outs) == len(nodes)

    # unique agreement per instance: at most one input value among phase-2
    # successes, at most two among phase-1 successes
    per_inst: dict = {}
    for node in nodes.values():
        for tag, bua in _bua_instances(node):
            s1set, s2set = per_inst.setdefault(tag, (set(), set()))
            if bua.w is not None:
                if bua.s1 == 1:
                    s1set.add(bua.w)
                if bua.s2 == 1:
                    s2set.add(bua.w)
    gamma1 = all(len(s1) <= 2 for s1, _ in per_inst.values())
    unique = all(len(s2) <= 1 for _, s2 in per_inst.values())

    totality = (not outs) or len(outs) == len(nodes)
    if reason == "ok":
        totality = len(outs) == len(nodes)

    checks = {
        "consistency": consistency,
        "unique_agreement": unique,
        "gamma1_at_most_2": gamma1,
        "totality": totality,
    }
    if validity_applicable:
        checks["validity"] = validity
    return checks


# ---------------------------------------------------------------------------
# scenarios and sweeps
# ---------------------------------------------------------------------------


def scenario_split_input(n: int, t: int, sizes: Optional[tuple] = None,
                         **overrides) -> SimConfig:
    """Partition honest nodes into two input camps with a withholding adversary.

    Default sizes follow (n - t - f, t, f) with f = t: the first group
    holds one value, the second another, and the f Byzantine nodes run
    the protocol honestly on the second value while never sending
    anything to the first group.
    """
    if sizes is None:
        sizes = (n - 2 * t, t, t)
    a1, a2, f = sizes
    if a1 + a2 + f != n or f > t or min(a1, a2, f) < 0:
        raise ValueError(f"invalid partition {sizes} for n={n}, t={t}")
    base = SimConfig(n=n, t=t, **overrides)
    w_a = base.default_message(1)
    w_b = base.default_message(2)
    inputs = {}
    for i in range(1, a1 + 1):
        inputs[i] = w_a
    for i in range(a1 + 1, a1 + a2 + 1):
        inputs[i] = w_b
    for i in range(a1 + a2 + 1, n + 1):
        inputs[i] = w_b
    base.inputs = inputs
    base.byzantine = tuple(range(a1 + a2 + 1, n + 1))
    base.adversary = "withhold_from_subset"
    base.adversary_targets = tuple(range(1, a1 + 1))
    return base


SCENARIOS = {"split-input": scenario_split_input}


def sweep(base: SimConfig, cells, seeds: int = 3) -> list:
    """Run a grid of configs over several seeds; one summary row per cell.

    ``cells`` is a list of override dicts.  Each row reports mean/max
    totals and the ratio of measured bits to max(n*len, n*t*log q).
    """
    from dataclasses import replace

    rows = []
    for cell in cells:
        bits, ideals, rounds = [], [], []
        reports = []
        for s in range(seeds):
            cfg = replace(base, seed=base.seed + s, **cell)
            rep = run(cfg)
            reports.append(rep)
            bits.append(rep.metrics.total_bits)
            ideals.append(rep.metrics.ideal_total_bits)
            rounds.append(rep.metrics.max_causal_round)
        cfg0 = replace(base, **cell)
        params = _make_params(cfg0)
        denom = max(cfg0.n * cfg0.msg_len_bits,
                    cfg0.n * cfg0.t * (params.q - 1).bit_length())
        rows.append({
            **cell,
            "mean_bits": sum(bits) / len(bits),
            "max_bits": max(bits),
            "mean_ideal_bits": sum(ideals) / len(ideals),
            "mean_rounds": sum(rounds) / len(rounds),
            "max_rounds": max(rounds),
            "ratio": (sum(bits) / len(bits)) / denom,
            "ideal_ratio": (sum(ideals) / len(ideals)) / denom,
            "ok": all(r.ok for r in reports),
        })
    return rows
