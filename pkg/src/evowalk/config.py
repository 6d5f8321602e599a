"""Experiment configuration files.

INI-style text, one ``[section]`` per experiment::

    [dense-10]
    family = random_threshold    # random_threshold | lollipop | path | clique | file
    n = 10
    threshold = 0.85
    p = 0.9, 0.5, 0.2, 0.1
    trials = 1000
    seed = 7

Optional keys: ``k`` (lollipop clique size), ``path`` (edge-list file),
``q`` (switches the rule to Birth-Death), ``rule`` (bernoulli |
birth_death | general), ``history`` and ``table`` for general rules (the table
lists ``pattern: probability`` pairs, bit ``i`` of the pattern being the edge's
state ``i + 1`` steps back; ``p`` is then omitted), ``strategy`` (rwa | rwd),
``start`` (node id or ``all``), ``chaining`` (bool), ``regenerate`` (bool:
new random graph per row), ``step_limit``.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from pathlib import Path

FAMILIES = ("random_threshold", "lollipop", "path", "clique", "file")
RULES = ("bernoulli", "birth_death", "general")
KNOWN_KEYS = {
    "family", "n", "k", "threshold", "path", "p", "q", "rule", "history", "table",
    "strategy", "trials", "seed", "start", "chaining", "regenerate", "step_limit",
}


class ConfigError(ValueError):
    def __init__(self, message: str, lineno: int | None = None, section: str | None = None, key: str | None = None):
        where = []
        if lineno is not None:
            where.append(f"line {lineno}")
        if section is not None:
            where.append(f"[{section}]")
        if key is not None:
            where.append(key)
        super().__init__(f"{' '.join(where)}: {message}" if where else message)
        self.lineno = lineno
        self.section = section
        self.key = key


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    family: str
    n: int | None
    k: int | None
    threshold: float | None
    path: str | None
    ps: tuple[float, ...]
    q: float | None
    strategy: str
    trials: int
    seed: int
    start: int | str
    chaining: bool
    regenerate: bool
    step_limit: int
    rule: str = "bernoulli"
    history: int | None = None
    table: tuple[float, ...] | None = None


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    out = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        sm = re.match(r"\s*\[([^\]]+)\]", line)
        if sm:
            section = sm.group(1).strip()
            continue
        km = re.match(r"\s*([A-Za-z_][\w]*)\s*[=:]", line)
        if km and section is not None:
            out[(section, km.group(1).lower())] = lineno
    return out


def parse_config(text: str, base_dir: str | Path | None = None) -> list[ExperimentSpec]:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        raise ConfigError(str(exc).splitlines()[0], lineno) from None
    lines = _key_lines(text)
    if not parser.sections():
        raise ConfigError("no experiment sections found")

    specs = []
    for name in parser.sections():
        sec = parser[name]

        def fail(key, msg):
            raise ConfigError(msg, lines.get((name, key)), name, key)

        for key in sec:
            if key not in KNOWN_KEYS:
                fail(key, "unknown key")

        def get(key, conv, default=..., what="value"):
            if key not in sec:
                if default is ...:
                    raise ConfigError("missing required key", None, name, key)
                return default
            raw = sec[key].strip()
            try:
                return conv(raw)
            except (ValueError, TypeError):
                fail(key, f"invalid {what} {raw!r}")

        def prob(raw):
            x = float(raw)
            if not 0.0 <= x <= 1.0:
                raise ValueError
            return x

        def positive_prob(raw):
            x = prob(raw)
            if x == 0.0:
                raise ValueError
            return x

        def boolean(raw):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError

        family = get("family", str, "random_threshold")
        if family not in FAMILIES:
            fail("family", f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
        n = get("n", int, None, "integer")
        if family != "file" and (n is None or n < 2):
            fail("n", "n >= 2 is required for generated graphs")
        k = get("k", int, None, "integer")
        threshold = get("threshold", prob, None, "probability")
        path = get("path", str, None)
        if family == "random_threshold" and threshold is None:
            raise ConfigError("random_threshold family needs 'threshold'", None, name, "threshold")
        if family == "lollipop" and k is None:
            raise ConfigError("lollipop family needs 'k'", None, name, "k")
        if family == "file":
            if path is None:
                raise ConfigError("file family needs 'path'", None, name, "path")
            if base_dir is not None and not Path(path).is_absolute():
                path = str(Path(base_dir) / path)
        q = get("q", prob, None, "probability")
        rule = get("rule", str.lower, "birth_death" if q is not None else "bernoulli")
        if rule not in RULES:
            fail("rule", f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")
        history = table = None
        if rule == "general":
            history = get("history", int, what="integer")
            if not 0 <= history <= 8:
                fail("history", "history must lie in 0..8")

            def pairs(raw):
                out = {}
                for item in raw.split(","):
                    pat, val = item.split(":")
                    out[int(pat, 0)] = prob(val)
                return out

            mapping = get("table", pairs, what="pattern table")
            if sorted(mapping) != list(range(1 << history)):
                fail("table", f"table must give every pattern 0..{(1 << history) - 1} exactly once")
            table = tuple(mapping[i] for i in range(1 << history))
            if "p" in sec or q is not None:
                fail("p" if "p" in sec else "q", "general rules take their probabilities from 'table'")
            ps = (None,)
        else:
            if rule == "birth_death" and q is None:
                raise ConfigError("birth_death rule needs 'q'", None, name, "q")
            if rule == "bernoulli" and q is not None:
                fail("q", "bernoulli rule takes no 'q'")
            ps = get("p", lambda raw: tuple(positive_prob(x) for x in raw.split(",") if x.strip()),
                     what="probability list (each in (0, 1])")
            if not ps:
                fail("p", "empty probability list")
        strategy = get("strategy", str.lower, "rwa")
        if strategy not in ("rwa", "rwd"):
            fail("strategy", f"strategy must be rwa or rwd, got {strategy!r}")
        trials = get("trials", int, 1000, "integer")
        if trials < 1:
            fail("trials", "trials must be >= 1")
        seed = get("seed", int, 0, "integer")
        start = get("start", lambda raw: raw if raw == "all" else int(raw), 0, "start node")
        chaining = get("chaining", boolean, True, "boolean")
        regenerate = get("regenerate", boolean, True, "boolean")
        step_limit = get("step_limit", int, 10**9, "integer")
        specs.append(
            ExperimentSpec(name, family, n, k, threshold, path, ps, q, strategy, trials, seed, start,
                           chaining, regenerate, step_limit, rule, history, table)
        )
    return specs


def load_config(path: str | Path) -> list[ExperimentSpec]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)
