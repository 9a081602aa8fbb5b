"""Draft-to-patent generation, dataset building and evaluation."""

import json

from ._patentpipe import (
    AlignmentError,
    ConfigError,
    Error,
    ParseError,
    bleu,
    default_split_sizes,
    extract_tag,
    render_prompt,
    rouge,
    split_sentences,
    template_names,
)
from . import _patentpipe as _native

__all__ = [
    "AlignmentError",
    "ConfigError",
    "Error",
    "ParseError",
    "bleu",
    "build_dataset",
    "default_split_sizes",
    "extract_tag",
    "generate",
    "irr",
    "make_splits",
    "render_prompt",
    "rouge",
    "score",
    "split_sentences",
    "template_names",
]


def _opt_path(p):
    return None if p is None else str(p)


def generate(draft, config=None, mock_playbook=None, out_dir=None):
    """Run the pipeline on a draft file. Returns a dict with status, warnings,
    patent (JSON form, None when partial) and the rendered text."""
    return json.loads(
        _native._generate(str(draft), _opt_path(config) or "", _opt_path(mock_playbook) or "", _opt_path(out_dir))
    )


def irr(text, t=0.2, epsilon=1e-6, cap=None):
    """IRR of a text. Raises Error for fewer than two sentences."""
    return json.loads(_native._irr(text, t, epsilon, cap))


def score(generated, reference, t=(), out_dir=None):
    """Score two directories of <doc_id>.txt files; returns the report dict."""
    return json.loads(_native._score(str(generated), str(reference), list(t), _opt_path(out_dir)))


def make_splits(ids, sizes, seed):
    train, valid, test = sizes
    return json.loads(_native._split(list(ids), train, valid, test, seed))


def build_dataset(records, out_dir, config=None, mock_playbook=None, jobs=0):
    return json.loads(
        _native._build_dataset(
            str(records), _opt_path(config) or "", _opt_path(mock_playbook) or "", str(out_dir), jobs
        )
    )
