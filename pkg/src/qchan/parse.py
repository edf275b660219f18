"""Parser for the textual channel grammar used by the CLI.

Examples::

    depol:d=2,p=0.5
    deph:p=0.4
    dephgen:file=gamma.csv
    amp:gamma=0.3
    erase:nu=0.2,d=3
    flag:p=0.75,a=amp:gamma=0.2,b=amp:gamma=0.19
    kraus:file=ops.json
    id:d=2
"""

import csv
import json
from pathlib import Path

import numpy as np

from . import channels as chs
from .errors import ParseError, QchanError


_KEYS = {
    "depol": {"d", "p"},
    "deph": {"p"},
    "dephgen": {"file"},
    "amp": {"gamma"},
    "erase": {"nu", "d"},
    "flag": {"p", "a", "b"},
    "kraus": {"file"},
    "id": {"d"},
}


def _nested_open(value):
    """Keys a nested spec value can still absorb, or an empty set."""
    kind, sep, body = value.partition(":")
    if not sep or kind not in _KEYS:
        return set()
    pieces = _glue(body)
    open_keys = _KEYS[kind] - {piece.split("=", 1)[0] for piece in pieces}
    if pieces and "=" in pieces[-1]:
        open_keys |= _nested_open(pieces[-1].split("=", 1)[1])
    return open_keys


def _glue(body):
    """Comma pieces of ``body`` with nested spec arguments glued back on.

    A piece joins the previous one when its key is still open in the nested
    spec that the previous piece carries.
    """
    out = []
    for piece in (body.split(",") if body else []):
        key = piece.split("=", 1)[0]
        if out and "=" in out[-1]:
            value = out[-1].split("=", 1)[1]
            if "=" not in piece or key in _nested_open(value):
                out[-1] += "," + piece
                continue
        out.append(piece)
    return out


def _split_top(body):
    """Parse ``k=v,k=v`` into a dict, keeping nested ``a=``/``b=`` specs intact."""
    args = {}
    for piece in _glue(body):
        if "=" not in piece:
            raise ParseError(f"expected key=value, got {piece!r}")
        k, v = piece.split("=", 1)
        if k in args:
            raise ParseError(f"duplicate key {k!r}")
        args[k] = v
    return args


def _float(args, key, kind):
    try:
        return float(args[key])
    except KeyError:
        raise ParseError(f"{kind}: missing {key}=") from None
    except ValueError:
        raise ParseError(f"{kind}: {key} is not a number: {args[key]!r}") from None


def _int(args, key, kind):
    try:
        return int(args[key])
    except KeyError:
        raise ParseError(f"{kind}: missing {key}=") from None
    except ValueError:
        raise ParseError(f"{kind}: {key} is not an integer: {args[key]!r}") from None


def _expect(args, keys, kind):
    extra = set(args) - set(keys)
    if extra:
        raise ParseError(f"{kind}: unexpected keys {sorted(extra)}")


def read_gamma_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    try:
        g = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric entry ({exc})") from None
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ParseError(f"{path}: expected a square matrix")
    return g


def read_kraus_json(path):
    """Kraus list as ``[[[re, im], ...], ...]``: each matrix row-major with pairs per entry.

    Nested rows (``[[[re, im], ...], [[re, im], ...]]`` per matrix) are also accepted.
    """
    data = json.loads(Path(path).read_text())
    ops = []
    for m in data:
        a = np.asarray(m, dtype=float)
        if a.shape[-1] != 2:
            raise ParseError(f"{path}: entries must be [re, im] pairs")
        z = a[..., 0] + 1j * a[..., 1]
        if z.ndim == 1:
            n = int(round(np.sqrt(z.size)))
            if n * n != z.size:
                raise ParseError(f"{path}: flat matrix must be square")
            z = z.reshape(n, n)
        ops.append(z)
    shapes = {o.shape for o in ops}
    if len(shapes) != 1:
        raise ParseError(f"{path}: Kraus operators have mixed shapes {shapes}")
    return np.array(ops)


def parse_channel(spec):
    """Build a :class:`~qchan.channels.Channel` from a spec string."""
    spec = spec.strip()
    kind, _, body = spec.partition(":")
    args = _split_top(body)
    try:
        if kind == "depol":
            _expect(args, {"d", "p"}, kind)
            return chs.make_depolarizing(_int(args, "d", kind), _float(args, "p", kind))
        if kind == "deph":
            _expect(args, {"p"}, kind)
            return chs.make_qubit_dephasing(_float(args, "p", kind))
        if kind == "dephgen":
            _expect(args, {"file"}, kind)
            return chs.make_dephasing(read_gamma_csv(args["file"]))
        if kind == "amp":
            _expect(args, {"gamma"}, kind)
            return chs.make_amplitude_damping(_float(args, "gamma", kind))
        if kind == "erase":
            _expect(args, {"nu", "d"}, kind)
            return chs.make_erasure(_float(args, "nu", kind), _int(args, "d", kind))
        if kind == "flag":
            _expect(args, {"p", "a", "b"}, kind)
            if "a" not in args or "b" not in args:
                raise ParseError("flag: needs a=<spec> and b=<spec>")
            return chs.make_flagged_mixture(
                _float(args, "p", kind), parse_channel(args["a"]), parse_channel(args["b"]))
        if kind == "kraus":
            _expect(args, {"file"}, kind)
            return chs.Channel(read_kraus_json(args["file"]), label=f"kraus({args['file']})")
        if kind == "id":
            _expect(args, {"d"}, kind)
            return chs.identity(_int(args, "d", kind))
    except ParseError:
        raise
    except (QchanError, OSError) as exc:
        raise ParseError(f"{spec!r}: {exc}") from exc
    raise ParseError(f"unknown channel kind {kind!r}")
