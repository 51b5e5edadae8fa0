"""
Line-oriented text formats for labelings (FPCL v1) and certificates (FPCY v1).

All vertex ids and values are 1-based on disk. Blank lines and lines starting
with '#' are ignored by every reader.
"""

import logging
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple, Union

from core.errors import FormatError
from core.labeling import CycleCertificate, Labeling

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

LABELING_MAGIC = "FPCL"
CERTIFICATE_MAGIC = "FPCY"
FORMAT_VERSION = 1


def content_lines(text: str) -> List[Tuple[int, str]]:
    """Non-blank, non-comment lines with their 1-based line numbers."""
    lines = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append((number, line))
    return lines


def parse_ints(tokens: Sequence[str], line: int) -> List[int]:
    try:
        return [int(token) for token in tokens]
    except ValueError:
        raise FormatError(f"expected integers, got {' '.join(tokens)!r}", line) from None


def expect_header(lines: List[Tuple[int, str]], magic: str) -> Iterator[Tuple[int, str]]:
    """Check the `<MAGIC> 1` header line and return an iterator over the rest."""
    if not lines:
        raise FormatError(f"empty input, expected a {magic} header")
    number, header = lines[0]
    if header.split() != [magic, str(FORMAT_VERSION)]:
        raise FormatError(f"expected header '{magic} {FORMAT_VERSION}', got {header!r}", number)
    return iter(lines[1:])


def parse_keyed_ints(line: Tuple[int, str], keys: Sequence[str]) -> List[int]:
    """Parse `key1 <int> key2 <int> ...` in the given key order."""
    number, text = line
    tokens = text.split()
    if len(tokens) != 2 * len(keys) or tokens[0::2] != list(keys):
        expected = " ".join(f"{key} <{key}>" for key in keys)
        raise FormatError(f"expected '{expected}', got {text!r}", number)
    return parse_ints(tokens[1::2], number)


def format_labeling(l: Labeling) -> str:
    lines = [f"{LABELING_MAGIC} {FORMAT_VERSION}", f"n {l.n} d {l.d}"]
    for u, v in l.edges():
        table = " ".join(str(y + 1) for y in l.tables[u, v].tolist())
        lines.append(f"{u + 1} {v + 1} : {table}")
    return "\n".join(lines) + "\n"


def parse_labeling(text: str) -> Labeling:
    """
    Parse an FPCL v1 document.

    Args:
        text: The document

    Returns:
        The labeling

    Raises:
        FormatError: On any deviation from the format, with the offending line
    """
    lines = content_lines(text)
    rest = expect_header(lines, LABELING_MAGIC)
    size_line = next(rest, None)
    if size_line is None:
        raise FormatError("missing 'n <n> d <d>' line")
    n, d = parse_keyed_ints(size_line, ("n", "d"))
    if n < 1 or d < 1:
        raise FormatError(f"need n >= 1 and d >= 1, got n={n}, d={d}", size_line[0])

    labels = {}
    for number, line in rest:
        head, sep, tail = line.partition(":")
        if not sep:
            raise FormatError(f"expected '<u> <v> : <f(1)> ... <f(d)>', got {line!r}", number)
        pair = parse_ints(head.split(), number)
        table = parse_ints(tail.split(), number)
        if len(pair) != 2:
            raise FormatError(f"expected two vertex ids before ':', got {head.strip()!r}", number)
        u, v = pair
        if not (1 <= u <= n and 1 <= v <= n) or u == v:
            raise FormatError(f"invalid edge ({u}, {v}) for n = {n}", number)
        if (u - 1, v - 1) in labels:
            raise FormatError(f"edge ({u}, {v}) labeled twice", number)
        if len(table) != d or not all(1 <= y <= d for y in table):
            raise FormatError(f"edge ({u}, {v}) needs {d} values in [1, {d}]", number)
        labels[(u - 1, v - 1)] = [y - 1 for y in table]

    if len(labels) != n * (n - 1):
        raise FormatError(f"expected {n * (n - 1)} edge lines, got {len(labels)}")
    return Labeling.from_labels(n, d, labels)


def format_certificate(c: CycleCertificate) -> str:
    cycle = " ".join(str(v + 1) for v in c.vertices)
    trace = " ".join(str(x + 1) for x in c.trace)
    return f"{CERTIFICATE_MAGIC} {FORMAT_VERSION}\ncycle {cycle}\ntrace {trace}\n"


def parse_certificate(text: str) -> CycleCertificate:
    """Parse an FPCY v1 document; the fixed value is read off the first trace entry."""
    lines = content_lines(text)
    rest = expect_header(lines, CERTIFICATE_MAGIC)
    body = list(rest)
    if len(body) != 2:
        raise FormatError(f"expected 'cycle' and 'trace' lines, got {len(body)} lines")
    (cycle_no, cycle_line), (trace_no, trace_line) = body
    cycle_tokens = cycle_line.split()
    trace_tokens = trace_line.split()
    if not cycle_tokens or cycle_tokens[0] != "cycle":
        raise FormatError(f"expected 'cycle <v1> ... <vk>', got {cycle_line!r}", cycle_no)
    if not trace_tokens or trace_tokens[0] != "trace":
        raise FormatError(f"expected 'trace <x0> ... <xk>', got {trace_line!r}", trace_no)
    vertices = parse_ints(cycle_tokens[1:], cycle_no)
    trace = parse_ints(trace_tokens[1:], trace_no)
    if not vertices or not trace:
        raise FormatError("certificate needs at least one vertex and one trace value")
    if min(vertices) < 1 or min(trace) < 1:
        raise FormatError("vertex ids and values are 1-based")
    return CycleCertificate(tuple(v - 1 for v in vertices), trace[0] - 1, tuple(x - 1 for x in trace))


def read_labeling(path: PathLike) -> Labeling:
    logger.debug(f"Reading labeling from {path}")
    return parse_labeling(Path(path).read_text())


def write_labeling(path: PathLike, l: Labeling) -> None:
    Path(path).write_text(format_labeling(l))
    logger.info(f"Wrote labeling n={l.n} d={l.d} to {path}")


def read_certificate(path: PathLike) -> CycleCertificate:
    logger.debug(f"Reading certificate from {path}")
    return parse_certificate(Path(path).read_text())


def write_certificate(path: PathLike, c: CycleCertificate) -> None:
    Path(path).write_text(format_certificate(c))
    logger.info(f"Wrote certificate on {c.length} vertices to {path}")
