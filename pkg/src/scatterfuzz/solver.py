"""Feedback-guided search and replacement for scattered string comparisons.

Solves one comparison at a time: for each character of the observed
string, scan the already-read region of the input for candidate bytes,
tentatively replace one with the ideal character, and keep the
replacement only when re-execution shows the observed buffer changed at
that exact position.  Locked positions advance a floor index, so stream
ordering prunes earlier candidates.  Includes string contraction via
token delimiters, head/tail alignment for substring checks, random-byte
colorization, and a naive Cartesian-product baseline for comparison.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .cmplog import CmpKey, find_record
from .errors import InconsistentBaseline
from .program import FuzzInput

# Ordered by how common each token separator is in embedded command
# parsers; space and newline first.
DEFAULT_DELIMITERS = bytes([0x20, 0x0A, 0x0D, 0x09, 0x00, 0x2C, 0x3B])

DEFAULT_COLORIZE_EXECS = 24


class SolveStatus(enum.Enum):
    SOLVED = "solved"
    UNMAPPED_BYTE = "unmapped_byte"
    CONTRACTION_TRIED = "contraction_tried"
    NOT_REACHED = "not_reached"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass
class SolveResult:
    status: SolveStatus
    mapped: list = field(default_factory=list)
    executions_used: int = 0
    solved_input: FuzzInput | None = None
    unmapped_index: int | None = None
    alignment_offset: int = 0


@dataclass
class NaiveSearchResult:
    status: SolveStatus
    combination_count: int
    executions_used: int = 0
    solved_input: FuzzInput | None = None


def default_exec_budget(input_len: int) -> int:
    return 4 * input_len + 64


def candidate_positions(working_input, byte_value, from_index, to_index):
    """Positions in [from_index, to_index) holding byte_value, ascending."""
    return [j for j in range(from_index, to_index)
            if working_input[j] == byte_value]


class _Budget(Exception):
    pass


class _Runner:
    """Counts executions against a budget on behalf of one solve attempt."""

    def __init__(self, executor, budget, log=None, key=None):
        self.executor = executor
        self.budget = budget
        self.execs = 0
        self.log = log
        self.key = key

    def run(self, data):
        if self.execs >= self.budget:
            raise _Budget
        self.execs += 1
        return self.executor(FuzzInput(bytes(data)))

    def event(self, phase, **fields):
        if self.log is not None:
            self.log({"key": [self.key.cmp_id, self.key.hit_index],
                      "phase": phase, "execs": self.execs, **fields})


def _matches(rec, ideal, offset):
    """Record satisfies the comparison at the given alignment."""
    return (rec is not None
            and rec.observed_len == offset + len(ideal)
            and rec.observed[offset:offset + len(ideal)] == ideal)


def solve(program, base_input, key: CmpKey, ideal: bytes, observed: bytes,
          executor, *, exec_budget=None, offset=0,
          delimiters=DEFAULT_DELIMITERS, log=None) -> SolveResult:
    """Map and replace the observed string's bytes so it equals ideal.

    ``observed``/``ideal`` are the logical strings (no terminator) from a
    prior trace of ``base_input``.  ``offset`` aligns ideal onto the
    observed buffer starting at that position (0 = head alignment).
    ``executor`` runs the target on a candidate input and returns a
    trace; it may be the VM or an injected test double.
    """
    base = bytes(base_input.bytes if isinstance(base_input, FuzzInput)
                 else base_input)
    budget = exec_budget if exec_budget is not None else default_exec_budget(
        len(base))
    rn = _Runner(executor, budget, log, key)
    try:
        return _solve_inner(base, key, ideal, observed, rn, offset,
                            delimiters)
    except _Budget:
        return SolveResult(SolveStatus.BUDGET_EXHAUSTED,
                           executions_used=rn.execs, alignment_offset=offset)


def _solve_inner(base, key, ideal, observed, rn, offset, delimiters):
    trace = rn.run(base)
    rec = find_record(trace, key)
    if rec is None or rec.observed_str != observed or rec.ideal_str != ideal:
        raise InconsistentBaseline(
            f"cmp {key.cmp_id}/{key.hit_index} not reproducible from base input")

    if _matches(rec, ideal, offset):
        return SolveResult(SolveStatus.SOLVED, executions_used=rn.execs,
                           solved_input=FuzzInput(base),
                           alignment_offset=offset)

    working = bytearray(base)
    last_index = 0
    read_limit = rec.read_cursor
    mapped = []
    last_rec = rec
    ideal_len = len(ideal)
    # Head alignment walks the whole observed string so over-long strings
    # reach the contraction step; tail alignment only covers ideal_len
    # positions ending at the observed string's end.
    limit = len(observed) if offset == 0 else offset + ideal_len

    pos = offset
    while pos < limit:
        if pos - offset >= ideal_len:
            # Observed string is longer than ideal: contract it.
            return _contract(working, key, ideal, observed, pos, rn,
                             last_index, read_limit, mapped, delimiters,
                             offset)
        target = ideal[pos - offset]
        want = observed[pos]
        found = False
        for j in range(last_index, read_limit):
            if working[j] != want:
                continue
            old = working[j]
            working[j] = target
            trace = rn.run(working)
            new_rec = find_record(trace, key)
            if (new_rec is not None and pos < len(new_rec.observed)
                    and new_rec.observed[pos] == target):
                last_index = j + 1
                read_limit = new_rec.read_cursor
                mapped.append((pos, j))
                last_rec = new_rec
                found = True
                rn.event("map", i=pos, j=j, outcome="locked")
                break
            working[j] = old
        if not found:
            rn.event("map", i=pos, j=None, outcome="unmapped")
            return SolveResult(SolveStatus.UNMAPPED_BYTE, mapped=mapped,
                               executions_used=rn.execs, unmapped_index=pos,
                               alignment_offset=offset)
        pos += 1

    # All targeted positions locked; the trace of the final working input
    # doubles as the verification execution (execution is deterministic).
    if _matches(last_rec, ideal, offset):
        rn.event("map", i=None, j=None, outcome="solved")
        return SolveResult(SolveStatus.SOLVED, mapped=mapped,
                           executions_used=rn.execs,
                           solved_input=FuzzInput(bytes(working)),
                           alignment_offset=offset)
    rn.event("map", i=None, j=None, outcome="verify_failed")
    return SolveResult(SolveStatus.NOT_REACHED, mapped=mapped,
                       executions_used=rn.execs, alignment_offset=offset)


def _contract(working, key, ideal, observed, pos, rn, last_index, read_limit,
              mapped, delimiters, offset):
    """Shorten an over-long observed string with a token delimiter.

    Locates the input byte feeding observed[pos] with the same
    scan-and-verify loop used for mapping (a sentinel write must be seen
    to change that position), then tries each delimiter there.
    """
    want = observed[pos]
    located = None
    for j in range(last_index, read_limit):
        if working[j] != want:
            continue
        old = working[j]
        sentinel = old ^ 0xA5
        working[j] = sentinel
        trace = rn.run(working)
        rec = find_record(trace, key)
        working[j] = old
        if (rec is not None and pos < len(rec.observed)
                and rec.observed[pos] == sentinel):
            located = j
            break
    if located is None:
        rn.event("contract", i=pos, j=None, outcome="not_located")
        return SolveResult(SolveStatus.CONTRACTION_TRIED, mapped=mapped,
                           executions_used=rn.execs, unmapped_index=pos,
                           alignment_offset=offset)

    old = working[located]
    for delim in delimiters:
        working[located] = delim
        trace = rn.run(working)
        rec = find_record(trace, key)
        if _matches(rec, ideal, offset):
            rn.event("contract", i=pos, j=located, outcome="solved")
            return SolveResult(SolveStatus.SOLVED,
                               mapped=mapped + [(pos, located)],
                               executions_used=rn.execs,
                               solved_input=FuzzInput(bytes(working)),
                               alignment_offset=offset)
    working[located] = old
    rn.event("contract", i=pos, j=located, outcome="exhausted")
    return SolveResult(SolveStatus.CONTRACTION_TRIED, mapped=mapped,
                       executions_used=rn.execs, unmapped_index=pos,
                       alignment_offset=offset)


def contract_string(program, base_input, key, ideal, observed, executor, *,
                    delimiters=DEFAULT_DELIMITERS, exec_budget=None,
                    log=None) -> SolveResult:
    """Standalone entry to the contraction path (observed longer than ideal)."""
    if len(observed) <= len(ideal):
        raise ValueError("contraction needs an over-long observed string")
    return solve(program, base_input, key, ideal, observed, executor,
                 exec_budget=exec_budget, delimiters=delimiters, log=log)


def solve_with_alignments(program, base_input, key, record, executor, *,
                          exec_budget=None, delimiters=DEFAULT_DELIMITERS,
                          log=None) -> SolveResult:
    """Try head alignment, then tail alignment for nested substring checks.

    Returns the first Solved result, else the attempt that locked more
    positions (ties favor head alignment).
    """
    observed = record.observed_str
    ideal = record.ideal_str
    head = solve(program, base_input, key, ideal, observed, executor,
                 exec_budget=exec_budget, offset=0, delimiters=delimiters,
                 log=log)
    if head.status is SolveStatus.SOLVED or len(observed) <= len(ideal):
        return head
    tail_offset = len(observed) - len(ideal)
    tail = solve(program, base_input, key, ideal, observed, executor,
                 exec_budget=exec_budget, offset=tail_offset,
                 delimiters=delimiters, log=log)
    if tail.status is SolveStatus.SOLVED:
        return tail
    return tail if len(tail.mapped) > len(head.mapped) else head


def colorize(program, base_input, key, executor, rng, *,
             max_execs=DEFAULT_COLORIZE_EXECS, log=None) -> FuzzInput:
    """Raise input entropy while keeping the targeted comparison reachable.

    Greedily replaces maximal spans with random bytes, splitting a span
    in half whenever the replacement stops the trace from containing the
    record at key.  Returns base_input unchanged if nothing colors.
    """
    base = bytes(base_input.bytes if isinstance(base_input, FuzzInput)
                 else base_input)
    work = bytearray(base)
    stack = [(0, len(work))]
    execs = 0
    while stack and execs < max_execs:
        lo, hi = stack.pop()
        if hi <= lo:
            continue
        saved = work[lo:hi]
        work[lo:hi] = bytes(rng.getrandbits(8) for _ in range(hi - lo))
        trace = executor(FuzzInput(bytes(work)))
        execs += 1
        if find_record(trace, key) is not None:
            continue
        work[lo:hi] = saved
        if hi - lo > 1:
            mid = (lo + hi) // 2
            stack.append((mid, hi))
            stack.append((lo, mid))
    if len(set(work)) < len(set(base)):
        work = bytearray(base)
    if log is not None:
        log({"key": [key.cmp_id, key.hit_index], "phase": "color",
             "execs": execs,
             "outcome": "colored" if bytes(work) != base else "unchanged"})
    return FuzzInput(bytes(work))


def naive_search(program, base_input, key, record, executor,
                 combo_budget: int, *, log=None) -> NaiveSearchResult:
    """Baseline: try the Cartesian product of candidate replacements.

    The reported combination count is the product of per-character
    candidate list sizes (computed arithmetically, never by running the
    target).  Enumeration skips combinations whose positions are not
    strictly increasing, since two string characters cannot map to one
    input byte.
    """
    base = bytes(base_input.bytes if isinstance(base_input, FuzzInput)
                 else base_input)
    observed = record.observed_str
    ideal = record.ideal_str
    n = min(len(observed), len(ideal))
    cands = [candidate_positions(base, observed[i], 0, record.read_cursor)
             for i in range(n)]
    count = math.prod(len(c) for c in cands) if n else 0

    if n == 0 or count == 0:
        return NaiveSearchResult(SolveStatus.UNMAPPED_BYTE, count)

    execs = 0
    stack = [(0, (), base)]
    # Depth-first product enumeration, pruned to strictly increasing
    # position tuples; memory stays linear in the string length.
    while stack:
        depth, positions, data = stack.pop()
        if depth == n:
            if execs >= combo_budget:
                return NaiveSearchResult(SolveStatus.BUDGET_EXHAUSTED, count,
                                         executions_used=execs)
            execs += 1
            trace = executor(FuzzInput(data))
            rec = find_record(trace, key)
            if (rec is not None and rec.observed_len == len(ideal)
                    and rec.observed_str == ideal):
                return NaiveSearchResult(SolveStatus.SOLVED, count,
                                         executions_used=execs,
                                         solved_input=FuzzInput(data))
            continue
        floor = positions[-1] if positions else -1
        for j in reversed(cands[depth]):
            if j <= floor:
                continue
            mutated = data[:j] + bytes([ideal[depth]]) + data[j + 1:]
            stack.append((depth + 1, positions + (j,), mutated))
    return NaiveSearchResult(SolveStatus.UNMAPPED_BYTE, count,
                             executions_used=execs)
