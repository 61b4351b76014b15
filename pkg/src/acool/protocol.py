"""Multi-valued asynchronous agreement composition.

One `AcoolNode` drives two unique-agreement instances, a binary
agreement, a binary reliable-agreement stage (READY amplification), and
a final honest-majority multicast decode:

* instance 1 runs on the raw input;
* a shared second input is derived either from instance 1's phase-2
  success (reuse own input) or by decoding the per-index majority
  symbols gossiped via NEWSYMBOL, so that even nodes starved by the
  adversary converge on the surviving input value;
* instance 2's vote feeds the binary agreement, whose output is
  amplified through READY messages (t+1 to echo, 2t+1 to fix);
* on a positive decision, nodes with a phase-2 success output their
  instance-2 message directly, and everyone else calibrates its own
  coded symbol by majority over instance-2 phase-2 successes, multicasts
  it, and decodes the agreed message from k+t matching symbols.

Handlers are synchronous and deterministic: every inbound event is
processed to quiescence (all standing guards re-evaluated in a fixed
order) before the next.  All cross-node effects travel as returned
(destination, message) pairs; nothing here touches a network.
"""

from __future__ import annotations

import logging
from typing import Optional

from .bua import Bua, BuaConfig, SiRecorded, SymbolDelivered
from .field_ecc import CodeParams, OecAccumulator
from .messages import (
    AbbaOut, Aux, CorrectSymbol, Decide, Est, NewSymbol, Ready, Si, Symbol,
)

log = logging.getLogger(__name__)


class _Bottom:
    """Distinguished empty output, distinct from every byte message."""

    __slots__ = ()

    def __repr__(self):
        return "<bottom>"

    def __bool__(self):
        return False


BOTTOM = _Bottom()


class ProtocolBase:
    """READY tallying, decision handling and final-multicast machinery.

    Shared by the binary-agreement composition and the reliable-agreement
    variant; subclasses differ only in what triggers the first READY and
    which unique-agreement instance backs the final decode.
    """

    def __init__(self, node_id: int, params: CodeParams):
        self.node_id = node_id
        self.params = params
        self.ready_sent: Optional[int] = None     # bit sent, None if not yet
        self.ready_seen: set = set()
        self.ready_from = {0: set(), 1: set()}
        self.v_out: Optional[int] = None
        self.ph3 = False
        self.calibrated = False
        self.calib_dirty = False
        self.oec_final = OecAccumulator(params)
        self.correct_seen: set = set()
        self.output = None                        # None | bytes | BOTTOM
        self.terminated = False

    # -- lifecycle -------------------------------------------------------

    def poll_output(self):
        return self.output

    def is_terminated(self) -> bool:
        return self.terminated

    def _terminate(self, value):
        if not self.terminated:
            self.output = value
            self.terminated = True

    def _broadcast(self, msg, sends):
        for j in range(1, self.params.n + 1):
            sends.append((j, msg))

    # -- READY stage -------------------------------------------------------

    def _on_ready(self, frm: int, bit: int):
        if frm in self.ready_seen or bit not in (0, 1):
            return
        self.ready_seen.add(frm)
        self.ready_from[bit].add(frm)

    def _ready_guards(self, sends) -> bool:
        """Amplify at t+1, decide at 2t+1.  Returns True on a state change."""
        t = self.params.t
        changed = False
        if self.ready_sent is None:
            for b in (1, 0):
                if len(self.ready_from[b]) >= t + 1:
                    self.ready_sent = b
                    self._broadcast(Ready(b), sends)
                    changed = True
                    break
        if self.v_out is None:
            for b in (1, 0):
                if len(self.ready_from[b]) >= 2 * t + 1:
                    self.v_out = b
                    changed = True
                    break
        return changed

    def _decision_guard(self) -> bool:
        """Turn a fixed vote into termination (zero) or phase three (one)."""
        if self.v_out is not None and not self.terminated and not self.ph3:
            if self.v_out == 0:
                self._terminate(BOTTOM)
            else:
                self.ph3 = True
                self.calib_dirty = True
            return True
        return False

    # -- final multicast ---------------------------------------------------

    def _on_correct_symbol(self, frm: int, elems):
        if frm in self.correct_seen or not self._valid_elems(elems):
            return
        self.correct_seen.add(frm)
        if not self.oec_final.done:
            self.oec_final.submit(frm, elems)

    def _harvest_final(self, bua: Bua, j: int):
        """Store a phase-2-successful peer's own symbol for the final decode."""
        if j in self.oec_final or self.oec_final.done:
            return
        pair = bua.delivered.get(j)
        if pair is not None and j in bua.S1p2:
            self.oec_final.submit(j, pair[1])

    def _final_decode_guard(self, bua: Bua, sends) -> bool:
        """Phase-three progress over the given unique-agreement instance.

        Fast path: own phase-2 success pins the message.  Slow path:
        adopt the majority own-symbol among phase-2-successful peers,
        multicast it, then wait for the accumulated decode.
        """
        if not self.ph3 or self.terminated:
            return False
        if bua.vote is not None and bua.s2 == 1:
            self._terminate(bua.w)
            return True
        changed = False
        if not self.calibrated and self.calib_dirty:
            self.calib_dirty = False
            best = self._majority_symbol(bua)
            if best is not None:
                self.calibrated = True
                self._broadcast(CorrectSymbol(best), sends)
                changed = True
        if self.calibrated and self.oec_final.decoded is not None:
            self._terminate(self.oec_final.decoded)
            changed = True
        return changed

    def _majority_symbol(self, bua: Bua):
        """Smallest symbol delivered by >= t+1 phase-2-successful peers."""
        counts: dict = {}
        for j in bua.S1p2:
            pair = bua.delivered.get(j)
            if pair is not None:
                counts[pair[0]] = counts.get(pair[0], 0) + 1
        need = self.params.t + 1
        winners = sorted(y for y, c in counts.items() if c >= need)
        return winners[0] if winners else None

    def _valid_elems(self, elems) -> bool:
        if not isinstance(elems, tuple) or len(elems) != self.params.chunks:
            return False
        q = self.params.q
        return all(isinstance(e, int) and 0 <= e < q for e in elems)


class AcoolNode(ProtocolBase):
    """One node of the full agreement composition.

    ``abba`` is the node's single binary-agreement handle (adjudicated or
    coin-based).  ``skip_brba`` bypasses the READY stage when the binary
    agreement already guarantees totality.  ``legacy`` wires instance 1
    directly into the binary agreement with no shared-input derivation;
    it reproduces the composition that loses liveness under asynchrony
    and exists only for demonstration.
    """

    def __init__(self, node_id: int, params: CodeParams, abba,
                 skip_brba: bool = False, legacy: bool = False):
        super().__init__(node_id, params)
        self.bua1 = Bua(BuaConfig(1, params, node_id))
        self.bua2 = Bua(BuaConfig(2, params, node_id))
        self.abba = abba
        self.abba_in: Optional[int] = None
        self.w_input: Optional[bytes] = None
        self.w2: Optional[bytes] = None            # derived second input
        self.oec_new = OecAccumulator(params)
        self.y_table: dict = {}                    # symbol value -> senders
        self.y_major = None
        self.y_dirty = False
        self.newsym_seen: set = set()
        self.skip_brba = skip_brba
        self.legacy = legacy
        self.abba_race = False

    # -- external surface --------------------------------------------------

    def input(self, w: bytes):
        sends: list = []
        if self.terminated or self.w_input is not None:
            return sends
        if not w:
            log.debug("node %d: empty input ignored", self.node_id)
            return sends
        self.w_input = w
        s, ev = self.bua1.input(w)
        sends += s
        self._absorb1(ev)
        self._pump(sends)
        return sends

    def handle(self, frm: int, msg):
        sends: list = []
        if self.terminated:
            return sends
        if isinstance(msg, Symbol):
            if msg.inst == 1:
                s, ev = self.bua1.on_symbol(frm, msg.pair)
                sends += s
                self._absorb1(ev)
            elif msg.inst == 2 and not self.legacy:
                s, ev = self.bua2.on_symbol(frm, msg.pair)
                sends += s
                self._absorb2(ev)
        elif isinstance(msg, Si):
            if msg.phase in (1, 2):
                if msg.inst == 1:
                    s, ev = self.bua1.on_si(msg.phase, frm, msg.bit)
                    sends += s
                    self._absorb1(ev)
                elif msg.inst == 2 and not self.legacy:
                    s, ev = self.bua2.on_si(msg.phase, frm, msg.bit)
                    sends += s
                    self._absorb2(ev)
        elif isinstance(msg, NewSymbol):
            if not self.legacy and frm not in self.newsym_seen:
                self.newsym_seen.add(frm)
                if self._valid_elems(msg.elems) and frm not in self.oec_new:
                    self.oec_new.submit(frm, msg.elems)
        elif isinstance(msg, Ready):
            self._on_ready(frm, msg.bit)
        elif isinstance(msg, CorrectSymbol):
            self._on_correct_symbol(frm, msg.elems)
        elif isinstance(msg, (Est, Aux, Decide, AbbaOut)):
            sends += self.abba.handle(frm, msg)
        else:
            log.debug("node %d: dropping %r", self.node_id, msg)
        self._pump(sends)
        return sends

    # -- event absorption ---------------------------------------------------

    def _absorb1(self, events):
        """Fold instance-1 events into the majority table and share decoder."""
        for ev in events:
            if isinstance(ev, SymbolDelivered):
                j, pair = ev.sender, ev.pair
                self.y_table.setdefault(pair[0], set()).add(j)
                self.y_dirty = True
                if j in self.bua1.S1p1 and j not in self.oec_new:
                    self.oec_new.submit(j, pair[1])
            elif isinstance(ev, SiRecorded):
                if ev.phase == 1 and ev.bit == 1:
                    pair = self.bua1.delivered.get(ev.sender)
                    if pair is not None and ev.sender not in self.oec_new:
                        self.oec_new.submit(ev.sender, pair[1])
                elif ev.phase == 2 and ev.bit == 0:
                    self.y_dirty = True

    def _absorb2(self, events):
        """Fold instance-2 events into the final decode and calibration."""
        for ev in events:
            if isinstance(ev, SymbolDelivered):
                self.calib_dirty = True
                if ev.sender in self.bua2.S1p2:
                    self._harvest_final(self.bua2, ev.sender)
            elif isinstance(ev, SiRecorded) and ev.phase == 2:
                self.calib_dirty = True
                if ev.bit == 1:
                    self._harvest_final(self.bua2, ev.sender)

    # -- guard cascade -------------------------------------------------------

    def _pump(self, sends):
        """Re-evaluate all standing guards until quiescent."""
        changed = True
        while changed and not self.terminated:
            changed = False
            changed |= self._new_symbol_guard(sends)
            if self.w2 is None and self.oec_new.decoded is not None:
                self.w2 = self.oec_new.decoded
                changed = True
            changed |= self._second_input_guard(sends)
            changed |= self._abba_input_guard(sends)
            changed |= self._abba_output_guard(sends)
            if not self.skip_brba:
                changed |= self._ready_guards(sends)
            changed |= self._decision_guard()
            hb = self.bua1 if self.legacy else self.bua2
            changed |= self._final_decode_guard(hb, sends)

    def _new_symbol_guard(self, sends) -> bool:
        """Adopt and gossip the per-index majority symbol when starved.

        Fires once, only while the own phase-1 indicator is not 1: some
        value must be reported by n-2t peers and, together with the
        phase-2 zero set, cover n-t peers.
        """
        if (self.legacy or self.y_major is not None or not self.y_dirty
                or self.bua1.s1 == 1):
            return False
        self.y_dirty = False
        n, t = self.params.n, self.params.t
        s0p2 = self.bua1.S0p2
        for y in sorted(self.y_table):
            grp = self.y_table[y]
            if len(grp) >= n - 2 * t and len(grp | s0p2) >= n - t:
                self.y_major = y
                self._broadcast(NewSymbol(y), sends)
                return True
        return False

    def _second_input_guard(self, sends) -> bool:
        if self.legacy or self.bua2.w is not None:
            return False
        if self.w2 is not None:
            s, ev = self.bua2.input(self.w2)
            sends += s
            self._absorb2(ev)
            return True
        if self.bua1.s2 == 1 and self.w_input is not None:
            self.w2 = self.w_input
            return True
        return False

    def _abba_input_guard(self, sends) -> bool:
        if self.abba_in is not None:
            return False
        if self.legacy:
            if self.bua1.vote is not None:
                self.abba_in = self.bua1.vote
                sends += self.abba.input(self.abba_in)
                return True
            return False
        from_second = self.bua2.vote is not None
        from_first_zero = self.bua1.vote == 0 or self.bua1.s2 == 0
        if from_second and from_first_zero:
            self.abba_race = True
            log.debug("node %d: both agreement-input rules enabled", self.node_id)
        if from_second:
            self.abba_in = self.bua2.vote
        elif from_first_zero:
            self.abba_in = 0
        else:
            return False
        sends += self.abba.input(self.abba_in)
        return True

    def _abba_output_guard(self, sends) -> bool:
        out = self.abba.output
        if out is None:
            return False
        if self.skip_brba:
            if self.v_out is None:
                self.v_out = out
                return True
            return False
        if self.ready_sent is None:
            self.ready_sent = out
            self._broadcast(Ready(out), sends)
            return True
        return False
