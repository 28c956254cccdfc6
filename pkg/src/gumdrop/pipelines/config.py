"""Pipeline configuration: INI-style ``key = value`` files, one section per task.

Learner settings live in shared sections named after the learner
(``[forest]``, ``[extratrees]``, ``[gbt]``, ``[mlp]``) or the base module
(``[lr]``, ``[subtree]``, ``[bow]``, ``[wiki]``). Every run can echo the
fully resolved configuration with :meth:`PipelineConfig.to_text`.
"""

import configparser
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..features.schema import check_feature_names
from ..features.syntax import CLAUSAL_RELATIONS

TASKS = ("sent", "seg", "conn")

MODULES = {
    "sent": ("mlp", "lr", "wiki", "punct"),
    "seg": ("subtree", "bow"),
    "conn": ("freq",),
}

META_FEATURES = {
    "sent": ("word100", "upos", "case", "tok_len", "genre"),
    "seg": ("word100", "upos", "case", "tok_len", "genre", "quote", "paren", "sent_pct",
            "deprel", "headdist", "depbracket"),
    "conn": ("word100", "upos", "case", "tok_len", "genre", "quote", "paren", "sent_pct",
             "deprel", "headdist", "depbracket"),
}

DEFAULT_CANDIDATES = {"sent": ("forest", "extratrees", "gbt"),
                      "seg": ("forest", "extratrees", "gbt"),
                      "conn": ("forest",)}

LEARNER_DEFAULTS = {
    "forest": {"n_trees": 200, "max_depth": 12},
    "extratrees": {"n_trees": 200, "max_depth": 12},
    "gbt": {"n_trees": 200, "max_depth": 4, "learning_rate": 0.1},
    "mlp": {"embed_dim": 16, "hidden_dims": (64,), "epochs": 10, "lr": 0.05,
            "windows": (5, 7, 9), "features": ("wordlex", "upos", "case")},
    "lr": {"window": 5, "reg_grid": (0.01, 0.1, 1.0),
           "features": ("first", "last", "upos", "case", "digits", "consonants", "vowels",
                        "other", "tok_len", "tok_frq")},
    "subtree": {"window": 3, "n_trees": 200, "max_depth": 4, "learning_rate": 0.1,
                "features": ("word200", "upos", "case", "tok_len", "genre", "quote", "paren",
                             "sent_pct", "deprel", "headdist", "depbracket"),
                "filter": True},
    "bow": {"size": 200, "reg_grid": (0.1, 1.0, 10.0)},
    "wiki": {"lexicon": "", "min_freq": 10, "min_ratio": 0.5},
}

_TUPLE_KEYS = {"hidden_dims", "windows", "features", "reg_grid"}


def _parse_value(key, raw):
    raw = raw.strip()
    if key in _TUPLE_KEYS:
        items = [s.strip() for s in raw.split(",") if s.strip()]
        return tuple(_scalar(s) for s in items)
    return _scalar(raw)


def _scalar(raw):
    low = raw.lower()
    if low in ("on", "true", "yes"):
        return True
    if low in ("off", "false", "no"):
        return False
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def _format_value(value):
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, (tuple, list)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def _split_list(raw):
    return tuple(s.strip() for s in raw.split(",") if s.strip())


@dataclass
class PipelineConfig:
    task: str = "seg"
    modules: tuple = ()
    meta_features: tuple = ()
    meta_window: int = 3
    meta_candidates: tuple = ()
    folds: int = 5
    seed: int = 0
    force_sentence_starts: bool = True
    filter_meta: bool = True
    language: str = ""
    pos_source: str = "auto"
    clausal_relations: tuple = tuple(sorted(CLAUSAL_RELATIONS))
    genre_rules: str = ""
    learners: dict = field(default_factory=dict)
    external: tuple = ()

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError("unknown task %r" % self.task)
        if not self.modules:
            self.modules = MODULES[self.task]
        if not self.meta_features:
            self.meta_features = META_FEATURES[self.task]
        if not self.meta_candidates:
            self.meta_candidates = DEFAULT_CANDIDATES[self.task]
        merged = {k: dict(v) for k, v in LEARNER_DEFAULTS.items()}
        for name, params in (self.learners or {}).items():
            merged.setdefault(name, {}).update(params)
        self.learners = merged
        self.modules = tuple(self.modules)
        self.meta_features = tuple(self.meta_features)
        self.meta_candidates = tuple(self.meta_candidates)
        self.external = tuple(self.external)
        self.validate()

    def validate(self):
        for m in self.modules:
            if m not in MODULES[self.task]:
                raise ConfigError("unknown %s base module %r" % (self.task, m))
        if not self.modules and not self.external:
            raise ConfigError("at least one base module must be enabled")
        check_feature_names(self.meta_features)
        for name in ("lr", "subtree", "mlp"):
            check_feature_names(self.learners[name]["features"])
        for c in self.meta_candidates:
            if c not in ("forest", "extratrees", "gbt", "tree"):
                raise ConfigError("unknown metalearner %r" % c)
        if self.meta_window < 1 or self.meta_window % 2 == 0:
            raise ConfigError("meta_window must be odd and positive")
        if self.folds < 2:
            raise ConfigError("folds must be at least 2")
        if self.pos_source not in ("auto", "gold", "tagger"):
            raise ConfigError("pos_source must be auto, gold or tagger")
        for w in self.learners["mlp"]["windows"]:
            if w < 1 or w % 2 == 0:
                raise ConfigError("mlp windows must be odd and positive")

    def learner(self, name):
        return dict(self.learners.get(name, {}))

    @classmethod
    def from_text(cls, text, task):
        """Read the ``[task]`` section plus the shared learner sections."""
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise ConfigError("cannot parse config: %s" % e) from None
        kwargs = {"task": task}
        if parser.has_section(task):
            sec = parser[task]
            for key, raw in sec.items():
                if key in ("modules", "meta_features", "meta_candidates", "clausal_relations",
                           "external"):
                    kwargs[key] = _split_list(raw)
                elif key in ("meta_window", "folds", "seed"):
                    kwargs[key] = int(raw)
                elif key in ("force_sentence_starts", "filter_meta"):
                    kwargs[key] = sec.getboolean(key)
                elif key in ("language", "pos_source", "genre_rules"):
                    kwargs[key] = raw.strip()
                else:
                    raise ConfigError("unknown key %r in [%s]" % (key, task))
        learners = {}
        for name in LEARNER_DEFAULTS:
            if parser.has_section(name):
                for key, raw in parser[name].items():
                    if key not in LEARNER_DEFAULTS[name] and name not in ("forest", "extratrees",
                                                                          "gbt", "mlp"):
                        raise ConfigError("unknown key %r in [%s]" % (key, name))
                    learners.setdefault(name, {})[key] = _parse_value(key, raw)
        kwargs["learners"] = learners
        return cls(**kwargs)

    @classmethod
    def load(cls, path, task):
        with open(path, encoding="utf-8") as f:
            return cls.from_text(f.read(), task)

    def to_text(self):
        lines = ["[%s]" % self.task]
        for key in ("modules", "meta_features", "meta_window", "meta_candidates", "folds",
                    "seed", "force_sentence_starts", "filter_meta", "language", "pos_source",
                    "clausal_relations", "genre_rules", "external"):
            lines.append("%s = %s" % (key, _format_value(getattr(self, key))))
        for name in sorted(self.learners):
            lines.append("")
            lines.append("[%s]" % name)
            for key in sorted(self.learners[name]):
                lines.append("%s = %s" % (key, _format_value(self.learners[name][key])))
        return "\n".join(lines) + "\n"
