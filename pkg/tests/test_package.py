# this_file: tests/test_package.py
"""Top-level package surface."""

from __future__ import annotations

import re

import twat_robodyn


def test_version_is_semver():
    assert re.match(r"\d+\.\d+\.\d+", twat_robodyn.__version__)


def test_public_names_resolve():
    missing = [name for name in twat_robodyn.__all__ if not hasattr(twat_robodyn, name)]
    assert missing == []
    assert sorted(twat_robodyn.__all__) == twat_robodyn.__all__
