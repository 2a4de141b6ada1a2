"""Harassment-report chatbot core: preprocessing, features, classification, NER and dialogue."""

import json as _json

from ._core import (
    Chat,
    Model,
    SafechatError,
    data_dir,
    extract,
    generate_corpus,
    preprocess,
    tfidf,
    train,
)
from ._core import validate_ner as _validate_ner


def validate_ner(n=100, seed=42, ref_date=None):
    """Accuracy per slot kind over generated template variants, as a dict."""
    return _json.loads(_validate_ner(n, seed, ref_date))


__all__ = [
    "Chat",
    "Model",
    "SafechatError",
    "data_dir",
    "extract",
    "generate_corpus",
    "preprocess",
    "tfidf",
    "train",
    "validate_ner",
]
