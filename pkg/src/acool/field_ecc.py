"""Prime-field Reed-Solomon coding and online error correction.

Symbols live in GF(q) for a prime q >= max(n+1, 257).  A byte message is
framed with a 4-byte big-endian length prefix, zero-filled to capacity,
and split into ``chunks`` independent (n, k) codewords that share the
evaluation points x = 1..n.  Share j concatenates the j-th evaluation of
every chunk, so comparing two shares compares all chunks at once.

Decoding is true error correction (Berlekamp-Welch), not erasure-only:
from m observed shares it recovers the unique codeword at distance <= e
whenever 2e + k <= m.  `OecAccumulator` wraps the decoder in the
accumulate-retry loop used by the agreement protocols: collect shares one
at a time, attempt a decode once k + t are present, and accept only when
the re-encoding of the decoded message matches at least k + t of the
stored shares.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple, Optional, Sequence

log = logging.getLogger(__name__)

# Bits consumed by the length prefix that makes decoded output unambiguous.
# `derive_params` is a pure function of its bit-length argument; callers that
# feed byte messages through `ecc_encode` must size params for payload + frame
# (see `params_for_message_bits`).
LENGTH_PREFIX_BITS = 32


class ResilienceViolation(ValueError):
    """Raised when n < 3t + 1."""


class MessageTooLong(ValueError):
    """Raised when a framed message exceeds codeword capacity."""


class DecodeFailure(Exception):
    """Raised when no codeword lies within the correctable radius."""


def _is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    d = 3
    while d * d <= x:
        if x % d == 0:
            return False
        d += 2
    return True


def _next_prime(x: int) -> int:
    while not _is_prime(x):
        x += 1
    return x


@dataclass(frozen=True)
class CodeParams:
    """Code geometry shared by every protocol instance of one run.

    n: node count (evaluation points 1..n)
    t: fault bound, n >= 3t + 1
    k: data symbols per codeword, k = max(1, t // 3)
    q: prime field size, q >= n + 1
    chunks: parallel codewords per message
    """

    n: int
    t: int
    k: int
    q: int
    chunks: int

    @property
    def elem_payload_bits(self) -> int:
        """Usable data bits per field element: floor(log2 q)."""
        return self.q.bit_length() - 1

    @property
    def symbol_bits(self) -> int:
        """Metric width of one share: chunks * ceil(log2 q)."""
        return self.chunks * (self.q - 1).bit_length()

    @property
    def capacity_bits(self) -> int:
        return self.k * self.chunks * self.elem_payload_bits

    @property
    def oec_threshold(self) -> int:
        return self.k + self.t


def derive_params(n: int, t: int, msg_len_bits: int) -> CodeParams:
    """Pick code geometry for an ``msg_len_bits``-bit payload.

    k = max(1, floor(t/3)); q is the smallest prime >= max(n+1, 257);
    chunks = ceil(msg_len_bits / (k * floor(log2 q))).
    """
    if t < 0 or n < 3 * t + 1:
        raise ResilienceViolation(f"need n >= 3t+1, got n={n}, t={t}")
    if msg_len_bits < 1:
        raise ValueError("msg_len_bits must be >= 1")
    k = max(1, t // 3)
    q = _next_prime(max(n + 1, 257))
    payload = q.bit_length() - 1
    chunks = max(1, -(-msg_len_bits // (k * payload)))
    return CodeParams(n=n, t=t, k=k, q=q, chunks=chunks)


def params_for_message_bits(n: int, t: int, payload_bits: int) -> CodeParams:
    """Params sized so a ``payload_bits``-bit message fits after framing."""
    return derive_params(n, t, payload_bits + LENGTH_PREFIX_BITS)


class SymbolShare(NamedTuple):
    """One node's coded share: evaluation index plus one element per chunk."""

    index: int
    elems: tuple


def share_to_bytes(share: SymbolShare) -> bytes:
    """Wire form: index as u16, then each element as u32, big-endian."""
    return struct.pack(">H", share.index) + b"".join(
        struct.pack(">I", e) for e in share.elems
    )


def share_from_bytes(data: bytes) -> SymbolShare:
    if len(data) < 2 or (len(data) - 2) % 4 != 0:
        raise ValueError("malformed share encoding")
    index = struct.unpack_from(">H", data)[0]
    elems = tuple(
        struct.unpack_from(">I", data, 2 + 4 * i)[0]
        for i in range((len(data) - 2) // 4)
    )
    return SymbolShare(index, elems)


# ---------------------------------------------------------------------------
# byte <-> field element packing
# ---------------------------------------------------------------------------


def pack_message(params: CodeParams, message: bytes) -> list:
    """Frame and split a byte message into k*chunks field elements."""
    cap = params.capacity_bits
    need = LENGTH_PREFIX_BITS + 8 * len(message)
    if need > cap:
        raise MessageTooLong(f"{len(message)} bytes exceed capacity of {cap} bits")
    blob = (len(message) << (cap - LENGTH_PREFIX_BITS)) | (
        int.from_bytes(message, "big") << (cap - need)
    )
    b = params.elem_payload_bits
    total = params.k * params.chunks
    mask = (1 << b) - 1
    return [(blob >> (cap - (m + 1) * b)) & mask for m in range(total)]


def unpack_message(params: CodeParams, elems: Sequence[int]) -> bytes:
    """Inverse of `pack_message`; raises DecodeFailure on a bad frame."""
    b = params.elem_payload_bits
    cap = params.capacity_bits
    blob = 0
    for e in elems:
        blob = (blob << b) | e
    length = blob >> (cap - LENGTH_PREFIX_BITS)
    if LENGTH_PREFIX_BITS + 8 * length > cap:
        raise DecodeFailure("decoded length prefix exceeds capacity")
    if length == 0:
        return b""
    shift = cap - LENGTH_PREFIX_BITS - 8 * length
    return ((blob >> shift) & ((1 << (8 * length)) - 1)).to_bytes(length, "big")


# ---------------------------------------------------------------------------
# codeword layer
# ---------------------------------------------------------------------------


def encode_elements(params: CodeParams, data: Sequence[int]) -> list:
    """Evaluate each chunk's polynomial at x = 1..n.

    ``data`` holds k*chunks elements; chunk c uses data[c*k:(c+1)*k] as
    coefficients in ascending power order.  Returns one elems-tuple per
    node, indexable as result[j-1] for node j.
    """
    n, k, q, chunks = params.n, params.k, params.q, params.chunks
    if len(data) != k * chunks:
        raise ValueError(f"expected {k * chunks} data elements, got {len(data)}")
    out = []
    for x in range(1, n + 1):
        vals = []
        for c in range(chunks):
            acc = 0
            for coeff in reversed(data[c * k : (c + 1) * k]):
                acc = (acc * x + coeff) % q
            vals.append(acc)
        out.append(tuple(vals))
    return out


def ecc_encode(params: CodeParams, message: bytes) -> list:
    """Encode a byte message into n SymbolShares."""
    rows = encode_elements(params, pack_message(params, message))
    return [SymbolShare(i + 1, rows[i]) for i in range(params.n)]


def _interpolate(xs: Sequence[int], ys: Sequence[int], q: int) -> list:
    """Lagrange interpolation; returns ascending coefficients, len(xs) of them."""
    k = len(xs)
    coeffs = [0] * k
    for i in range(k):
        # numerator polynomial prod_{j != i} (x - x_j), built incrementally
        num = [1]
        denom = 1
        for j in range(k):
            if j == i:
                continue
            nxt = [0] * (len(num) + 1)
            for d, c in enumerate(num):
                nxt[d + 1] = (nxt[d + 1] + c) % q
                nxt[d] = (nxt[d] - c * xs[j]) % q
            num = nxt
            denom = denom * (xs[i] - xs[j]) % q
        scale = ys[i] * pow(denom, -1, q) % q
        for d in range(len(num)):
            coeffs[d] = (coeffs[d] + scale * num[d]) % q
    return coeffs


def _poly_eval(coeffs: Sequence[int], x: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def _solve_linear(mat: list, rhs: list, q: int) -> Optional[list]:
    """Solve mat * z = rhs over GF(q); free variables are set to 0.

    Returns None when the system is inconsistent.
    """
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    aug = [list(mat[r]) + [rhs[r] % q] for r in range(rows)]
    pivot_cols = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if aug[i][c] % q != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        inv = pow(aug[r][c], -1, q)
        aug[r] = [v * inv % q for v in aug[r]]
        for i in range(rows):
            if i != r and aug[i][c] % q != 0:
                f = aug[i][c]
                aug[i] = [(aug[i][j] - f * aug[r][j]) % q for j in range(cols + 1)]
        pivot_cols.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if aug[i][cols] % q != 0:
            return None
    sol = [0] * cols
    for row, c in enumerate(pivot_cols):
        sol[c] = aug[row][cols]
    return sol


def _poly_div(num: Sequence[int], den: Sequence[int], q: int):
    """Divide polynomials (ascending coeffs); returns (quotient, remainder)."""
    num = list(num)
    dd = len(den) - 1
    while dd > 0 and den[dd] == 0:
        dd -= 1
    lead_inv = pow(den[dd], -1, q)
    quot = [0] * max(1, len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i] * lead_inv % q
        quot[i - dd] = c
        if c:
            for j in range(dd + 1):
                num[i - dd + j] = (num[i - dd + j] - c * den[j]) % q
    return quot, num[:dd] if dd else []


def _decode_chunk(xs: Sequence[int], ys: Sequence[int], k: int, q: int,
                  max_errors: Optional[int] = None) -> list:
    """Recover the degree-(k-1) polynomial behind m >= k noisy evaluations.

    Corrects up to e = (m - k) // 2 errors via Berlekamp-Welch, lowered
    to ``max_errors`` when the caller can rule out larger error counts.
    Raises DecodeFailure when no codeword lies within that radius.
    """
    m = len(xs)
    if m < k:
        raise DecodeFailure("fewer shares than data symbols")
    # Zero-error fast path: fit the first k points and check the rest.
    p = _interpolate(xs[:k], ys[:k], q)
    if all(_poly_eval(p, x, q) == y for x, y in zip(xs, ys)):
        return p
    e = (m - k) // 2
    if max_errors is not None:
        e = min(e, max_errors)
    if e <= 0:
        raise DecodeFailure("inconsistent shares with no correction margin")
    # Unknowns: Q coefficients (deg <= k+e-1) then E's low coefficients
    # (E monic of degree e).  Equation per point:
    #   Q(x) - y * (E_low(x) + x^e) = 0.
    ncols = (k + e) + e
    mat = []
    rhs = []
    for x, y in zip(xs, ys):
        row = [0] * ncols
        xp = 1
        for d in range(k + e):
            row[d] = xp
            xp = xp * x % q
        xp = 1
        for d in range(e):
            row[k + e + d] = -y * xp % q
            xp = xp * x % q
        mat.append(row)
        rhs.append(y * pow(x, e, q) % q)
    sol = _solve_linear(mat, rhs, q)
    if sol is None:
        raise DecodeFailure("no error locator of admissible degree")
    qpoly = sol[: k + e]
    epoly = sol[k + e :] + [1]
    p, rem = _poly_div(qpoly, epoly, q)
    if any(rem):
        raise DecodeFailure("error locator does not divide the quotient")
    p = [c % q for c in p[:k]] + [0] * max(0, k - len(p))
    errors = sum(1 for x, y in zip(xs, ys) if _poly_eval(p, x, q) != y)
    if errors > e:
        raise DecodeFailure("nearest codeword outside correctable radius")
    return p


def decode_elements(params: CodeParams, shares: Mapping[int, Sequence[int]],
                    max_errors: Optional[int] = None) -> list:
    """Per-chunk error correction over a share map {index: elems}.

    A Byzantine sender normally corrupts a whole share, so the error
    positions found by correcting chunk 0 are tried as erasures for the
    remaining chunks (interpolate clean points, verify); chunks that
    do not fit that pattern fall back to full correction, keeping the
    per-chunk unique-decoding semantics exact.
    """
    xs = sorted(shares)
    if not xs or xs[0] < 1 or xs[-1] > params.n:
        raise DecodeFailure("share indices outside 1..n")
    k, q = params.k, params.q
    data = _decode_chunk(xs, [shares[x][0] for x in xs], k, q, max_errors)
    bad = {x for x in xs if _poly_eval(data, x, q) != shares[x][0]}
    clean = [x for x in xs if x not in bad]
    for c in range(1, params.chunks):
        ys = {x: shares[x][c] for x in xs}
        p = None
        if len(clean) >= k:
            cand = _interpolate(clean[:k], [ys[x] for x in clean[:k]], q)
            if all(_poly_eval(cand, x, q) == ys[x] for x in clean):
                p = cand
        if p is None:
            p = _decode_chunk(xs, [ys[x] for x in xs], k, q, max_errors)
        data.extend(p)
    return data


def ecc_decode(params: CodeParams, shares: Mapping[int, Sequence[int]],
               max_errors: Optional[int] = None) -> bytes:
    """Decode a byte message from m <= n shares with Byzantine errors.

    Recovers the unique message whose codeword differs from the given
    shares in <= e positions whenever 2e + k <= m.
    """
    for idx, elems in shares.items():
        if len(elems) != params.chunks:
            raise DecodeFailure(f"share {idx} has wrong chunk count")
    return unpack_message(params, decode_elements(params, shares, max_errors))


# ---------------------------------------------------------------------------
# online error correction
# ---------------------------------------------------------------------------


class OecAccumulator:
    """Accumulate shares and decode once enough agree.

    Each submission past the k + t threshold triggers a decode attempt.
    A decode is accepted only when re-encoding the decoded message matches
    at least k + t of the stored shares (and any extra ``accept`` predicate
    passes); the adversary holds at most t slots, so an accepted message is
    pinned down by >= k honest shares.
    """

    __slots__ = ("params", "threshold", "accept", "shares", "decoded", "done",
                 "attempts", "duplicates")

    def __init__(self, params: CodeParams, threshold: Optional[int] = None,
                 accept: Optional[Callable[[bytes], bool]] = None):
        self.params = params
        self.threshold = params.oec_threshold if threshold is None else threshold
        self.accept = accept
        self.shares: dict = {}
        self.decoded: Optional[bytes] = None
        self.done = False
        self.attempts = 0
        self.duplicates = 0

    def __contains__(self, index: int) -> bool:
        return index in self.shares

    def submit(self, index: int, elems: Sequence[int]) -> Optional[bytes]:
        """Store one share; returns the message on the accepting attempt."""
        if index in self.shares:
            self.duplicates += 1
            log.debug("duplicate share from %d ignored", index)
            return None
        self.shares[index] = tuple(elems)
        if self.done or len(self.shares) < self.threshold:
            return None
        self.attempts += 1
        try:
            # errors beyond m - threshold could never pass the match check
            message = ecc_decode(self.params, self.shares,
                                 max_errors=len(self.shares) - self.threshold)
        except DecodeFailure:
            return None
        codeword = encode_elements(self.params, pack_message(self.params, message))
        matches = sum(1 for i, s in self.shares.items() if codeword[i - 1] == s)
        if matches < self.threshold:
            return None
        if self.accept is not None and not self.accept(message):
            return None
        self.decoded = message
        self.done = True
        return message
