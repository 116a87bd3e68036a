"""Input file parsing and the shared gold-corpus data structures.

All formats are UTF-8 text, whitespace separated, "." decimal separator,
times in seconds. Parsed structures are immutable and safe to share across
evaluation workers.

A corpus directory holds:

    phone_alignment.txt   utt_id onset offset phone
    word_alignment.txt    utt_id onset offset word        (optional)
    utt2spk.txt           utt_id speaker                  (optional)
    utt_durations.txt     utt_id duration_s               (optional)
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BoundaryMismatch,
    DuplicateId,
    DimMismatch,
    EmptyClass,
    EmptyFile,
    EmptySlice,
    MalformedLine,
    NonMonotonicTime,
    OverlapError,
    UnknownUtterance,
)

SILENCE = "SIL"

# Forced aligners emit sub-millisecond jitter; gaps or overlaps up to this
# tolerance are snapped shut, larger gaps become explicit SILENCE tokens.
ALIGN_TOLERANCE = 0.001

PHONE_ALIGNMENT_FILE = "phone_alignment.txt"
WORD_ALIGNMENT_FILE = "word_alignment.txt"
UTT2SPK_FILE = "utt2spk.txt"
DURATIONS_FILE = "utt_durations.txt"


@dataclass(frozen=True)
class PhoneToken:
    utterance_id: str
    onset: float
    offset: float
    phone: str

    @property
    def duration(self) -> float:
        return self.offset - self.onset

    def is_silence(self) -> bool:
        return self.phone == SILENCE


@dataclass(frozen=True)
class WordToken:
    utterance_id: str
    onset: float
    offset: float
    word: str
    phone_span: tuple[int, int]  # half-open index range into the phone sequence


@dataclass(frozen=True)
class Fragment:
    utterance_id: str
    onset: float
    offset: float


@dataclass(frozen=True)
class Utterance:
    utterance_id: str
    speaker: str
    phones: tuple[PhoneToken, ...]
    words: tuple[WordToken, ...]
    duration: float

    def phone_labels(self) -> tuple[str, ...]:
        return tuple(p.phone for p in self.phones)


class GoldCorpus:
    """Immutable per-utterance gold alignments keyed by utterance id."""

    def __init__(self, utterances: dict[str, Utterance]):
        self.utterances = dict(utterances)

    def __contains__(self, utterance_id) -> bool:
        return utterance_id in self.utterances

    def __getitem__(self, utterance_id) -> Utterance:
        return self.utterances[utterance_id]

    def __iter__(self):
        return iter(sorted(self.utterances))

    def __len__(self) -> int:
        return len(self.utterances)


class FeatureSequence:
    """Time-stamped frame vectors for one utterance.

    Timestamps are frame centers, strictly increasing; all vectors share one
    dimension.
    """

    def __init__(self, utterance_id: str, times, vectors):
        times = np.asarray(times, dtype=np.float64)
        vectors = np.asarray(vectors, dtype=np.float64)
        if vectors.ndim == 1:
            vectors = vectors[:, None]
        if times.size == 0:
            raise EmptyFile(f"feature sequence for {utterance_id!r} is empty")
        if np.any(np.diff(times) <= 0):
            raise NonMonotonicTime(f"timestamps for {utterance_id!r} not strictly increasing")
        self.utterance_id = utterance_id
        self.times = times
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.times)


def slice_frames(seq: FeatureSequence, onset: float, offset: float) -> np.ndarray:
    """Frames whose timestamp t satisfies onset <= t < offset, in order.

    Half-open so adjacent slices compose without double counting. Raises
    EmptySlice when nothing falls inside; the caller decides skip vs fail.
    """
    if onset >= offset:
        raise ValueError(f"empty interval [{onset}, {offset})")
    lo = int(np.searchsorted(seq.times, onset, side="left"))
    hi = int(np.searchsorted(seq.times, offset, side="left"))
    if lo == hi:
        raise EmptySlice(f"no frame of {seq.utterance_id!r} in [{onset:.4f}, {offset:.4f})")
    return seq.vectors[lo:hi]


@dataclass
class ClusterSet:
    """Discovered fragments grouped into classes, as read from a class file."""

    clusters: dict[str, tuple[Fragment, ...]] = field(default_factory=dict)

    def all_fragments(self) -> list[tuple[str, Fragment]]:
        """(class_id, fragment) pairs in deterministic order."""
        out = []
        for class_id in sorted(self.clusters):
            for frag in self.clusters[class_id]:
                out.append((class_id, frag))
        return out

    def n_fragments(self) -> int:
        return sum(len(v) for v in self.clusters.values())


def _split_line(raw: str, n_fields: int, path, line_no) -> list[str]:
    fields = raw.split()
    if len(fields) != n_fields:
        raise MalformedLine(
            f"expected {n_fields} fields, got {len(fields)}: {raw.strip()!r}",
            path=path, line_no=line_no,
        )
    return fields


def _parse_time(text: str, path, line_no) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedLine(f"bad time value {text!r}", path=path, line_no=line_no) from None


def parse_phone_alignment(path) -> dict[str, list[PhoneToken]]:
    """Read a 4-field phone alignment into per-utterance token lists.

    Tokens are sorted by onset per utterance. Sub-tolerance gaps and overlaps
    are snapped shut; gaps wider than the tolerance become explicit SILENCE
    tokens so downstream projection never sees holes. Overlaps beyond the
    tolerance raise OverlapError.
    """
    path = Path(path)
    raw: dict[str, list[tuple[float, float, str, int]]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            utt, s_on, s_off, phone = _split_line(line, 4, path, line_no)
            onset = _parse_time(s_on, path, line_no)
            offset = _parse_time(s_off, path, line_no)
            if offset <= onset:
                raise MalformedLine(
                    f"inverted interval [{onset}, {offset}]", path=path, line_no=line_no
                )
            raw.setdefault(utt, []).append((onset, offset, phone, line_no))

    out: dict[str, list[PhoneToken]] = {}
    for utt, entries in raw.items():
        entries.sort(key=lambda e: (e[0], e[1]))
        tokens: list[PhoneToken] = []
        for onset, offset, phone, line_no in entries:
            if tokens:
                prev_off = tokens[-1].offset
                if onset < prev_off - ALIGN_TOLERANCE:
                    raise OverlapError(utt, line_no, path=path)
                if onset - prev_off > ALIGN_TOLERANCE:
                    tokens.append(PhoneToken(utt, prev_off, onset, SILENCE))
                onset = prev_off  # snap sub-ms jitter shut
                if offset <= onset:
                    raise OverlapError(utt, line_no, path=path)
            tokens.append(PhoneToken(utt, onset, offset, phone))
        out[utt] = tokens
    return out


def _boundary_index(boundaries: list[float], edge: float) -> int | None:
    """Index of the phone boundary matching `edge` within tolerance, else None."""
    i = bisect.bisect_left(boundaries, edge)
    for j in (i - 1, i):
        if 0 <= j < len(boundaries) and abs(boundaries[j] - edge) <= ALIGN_TOLERANCE:
            return j
    return None


def parse_word_alignment(path, phones: dict[str, list[PhoneToken]]) -> dict[str, list[WordToken]]:
    """Read a 4-field word alignment and attach phone index spans.

    Word edges must coincide with phone boundaries within the alignment
    tolerance, otherwise BoundaryMismatch.
    """
    path = Path(path)
    out: dict[str, list[WordToken]] = {utt: [] for utt in phones}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            utt, s_on, s_off, word = _split_line(line, 4, path, line_no)
            onset = _parse_time(s_on, path, line_no)
            offset = _parse_time(s_off, path, line_no)
            if offset <= onset:
                raise MalformedLine(
                    f"inverted interval [{onset}, {offset}]", path=path, line_no=line_no
                )
            if utt not in phones:
                raise UnknownUtterance(
                    f"utterance {utt!r} has no phone alignment", path=path, line_no=line_no
                )
            toks = phones[utt]
            # boundaries[i] is the onset of phone i; the final entry is the
            # utterance-final offset, so a span (i, j) is phones[i:j].
            boundaries = [t.onset for t in toks] + [toks[-1].offset]
            start = _boundary_index(boundaries, onset)
            end = _boundary_index(boundaries, offset)
            if start is None:
                raise BoundaryMismatch(utt, onset, path=path, line_no=line_no)
            if end is None or end <= start:
                raise BoundaryMismatch(utt, offset, path=path, line_no=line_no)
            out[utt].append(WordToken(utt, toks[start].onset, toks[end - 1].offset,
                                      word, (start, end)))
    for utt in out:
        out[utt].sort(key=lambda w: w.phone_span)
    return out


def parse_utt2spk(path) -> dict[str, str]:
    """Read "utt_id speaker" lines."""
    path = Path(path)
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            utt, spk = _split_line(line, 2, path, line_no)
            if utt in out and out[utt] != spk:
                raise DuplicateId(f"utterance {utt!r} mapped to two speakers",
                                  path=path, line_no=line_no)
            out[utt] = spk
    return out


def parse_durations(path) -> dict[str, float]:
    """Read "utt_id duration_s" lines."""
    path = Path(path)
    out: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            utt, s_dur = _split_line(line, 2, path, line_no)
            dur = _parse_time(s_dur, path, line_no)
            if dur <= 0:
                raise MalformedLine(f"non-positive duration {dur}", path=path, line_no=line_no)
            if utt in out:
                raise DuplicateId(f"duplicate duration for {utt!r}", path=path, line_no=line_no)
            out[utt] = dur
    return out


def load_corpus(corpus_dir) -> GoldCorpus:
    """Assemble a GoldCorpus from a corpus directory.

    The phone alignment is required; word alignment, utt2spk and durations
    are used when present (speaker defaults to "", duration to the last
    phone offset).
    """
    corpus_dir = Path(corpus_dir)
    phone_path = corpus_dir / PHONE_ALIGNMENT_FILE
    if not phone_path.exists():
        raise EmptyFile(f"missing {PHONE_ALIGNMENT_FILE}", path=corpus_dir)
    phones = parse_phone_alignment(phone_path)

    word_path = corpus_dir / WORD_ALIGNMENT_FILE
    words = parse_word_alignment(word_path, phones) if word_path.exists() else {}

    spk_path = corpus_dir / UTT2SPK_FILE
    speakers = parse_utt2spk(spk_path) if spk_path.exists() else {}

    dur_path = corpus_dir / DURATIONS_FILE
    durations = parse_durations(dur_path) if dur_path.exists() else {}

    utterances = {}
    for utt, toks in phones.items():
        duration = durations.get(utt, toks[-1].offset)
        if duration < toks[-1].offset:
            raise MalformedLine(
                f"declared duration {duration} ends before the last phone of {utt!r}",
                path=dur_path,
            )
        utterances[utt] = Utterance(
            utterance_id=utt,
            speaker=speakers.get(utt, ""),
            phones=tuple(toks),
            words=tuple(words.get(utt, ())),
            duration=duration,
        )
    return GoldCorpus(utterances)


def parse_features(path, utterance_id: str | None = None) -> FeatureSequence:
    """Read one feature file: each line a timestamp followed by d reals."""
    path = Path(path)
    if utterance_id is None:
        utterance_id = path.stem
    times: list[float] = []
    rows: list[list[float]] = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) < 2:
                raise MalformedLine("need a timestamp and at least one value",
                                    path=path, line_no=line_no)
            try:
                values = [float(x) for x in fields]
            except ValueError:
                raise MalformedLine(f"non-numeric value in {line.strip()!r}",
                                    path=path, line_no=line_no) from None
            if dim is None:
                dim = len(values) - 1
            elif len(values) - 1 != dim:
                raise DimMismatch(f"expected {dim} values, got {len(values) - 1}",
                                  path=path, line_no=line_no)
            if times and values[0] <= times[-1]:
                raise NonMonotonicTime(f"timestamp {values[0]} not increasing",
                                       path=path, line_no=line_no)
            times.append(values[0])
            rows.append(values[1:])
    if not times:
        raise EmptyFile("no frames", path=path)
    return FeatureSequence(utterance_id, times, rows)


def parse_class_file(path, corpus: GoldCorpus | None = None) -> ClusterSet:
    """Read a class file: "Class <id>" blocks of "utt onset offset" lines.

    Blocks are separated by blank lines. When a corpus is given, fragment
    intervals are validated against it.
    """
    path = Path(path)
    clusters: dict[str, tuple[Fragment, ...]] = {}
    current_id: str | None = None
    current: list[Fragment] = []
    current_line = 0

    def close_block():
        nonlocal current_id, current
        if current_id is None:
            return
        if not current:
            raise EmptyClass(f"class {current_id!r} has no fragments",
                             path=path, line_no=current_line)
        if current_id in clusters:
            raise DuplicateId(f"class {current_id!r} declared twice",
                              path=path, line_no=current_line)
        clusters[current_id] = tuple(current)
        current_id, current = None, []

    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                close_block()
                continue
            fields = stripped.split()
            if fields[0] == "Class":
                if current_id is not None:
                    close_block()
                if len(fields) != 2:
                    raise MalformedLine(f"bad class header {stripped!r}",
                                        path=path, line_no=line_no)
                current_id = fields[1]
                current_line = line_no
                continue
            if current_id is None:
                raise MalformedLine(f"fragment line outside a class block: {stripped!r}",
                                    path=path, line_no=line_no)
            if len(fields) != 3:
                raise MalformedLine(f"expected 'utt onset offset', got {stripped!r}",
                                    path=path, line_no=line_no)
            utt = fields[0]
            onset = _parse_time(fields[1], path, line_no)
            offset = _parse_time(fields[2], path, line_no)
            if offset <= onset:
                raise MalformedLine(f"inverted interval [{onset}, {offset}]",
                                    path=path, line_no=line_no)
            if corpus is not None:
                if utt not in corpus:
                    raise UnknownUtterance(f"unknown utterance {utt!r}",
                                           path=path, line_no=line_no)
                u = corpus[utt]
                if onset < u.phones[0].onset - ALIGN_TOLERANCE or offset > u.duration + ALIGN_TOLERANCE:
                    raise MalformedLine(
                        f"fragment [{onset}, {offset}] outside utterance {utt!r}",
                        path=path, line_no=line_no,
                    )
            current.append(Fragment(utt, onset, offset))
    close_block()
    return ClusterSet(clusters)


def write_class_file(clusters: ClusterSet, path) -> None:
    """Serialize a ClusterSet in the class-file format (round-trips)."""
    with open(path, "w", encoding="utf-8") as fh:
        for class_id in sorted(clusters.clusters):
            fh.write(f"Class {class_id}\n")
            for frag in clusters.clusters[class_id]:
                fh.write(f"{frag.utterance_id} {frag.onset:.6f} {frag.offset:.6f}\n")
            fh.write("\n")


def parse_score_table(path) -> dict[str, float]:
    """Read "item_id score" lines into a mapping; duplicate ids rejected."""
    path = Path(path)
    out: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            item, s_score = _split_line(line, 2, path, line_no)
            try:
                score = float(s_score)
            except ValueError:
                raise MalformedLine(f"bad score {s_score!r}", path=path, line_no=line_no) from None
            if item in out:
                raise DuplicateId(f"duplicate item {item!r}", path=path, line_no=line_no)
            out[item] = score
    return out
