#!/usr/bin/env python

import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join("..", "src")))

import sphinx_rtd_theme  # noqa; F401 - install theme

extensions = ["sphinx.ext.autodoc", "sphinx.ext.viewcode", "sphinx_rtd_theme"]
templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "shapephase"
copyright = "2026, shapephase developers"
author = "shapephase developers"
version = "0.1.0"
release = version

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
pygments_style = "sphinx"
autodoc_member_order = "bysource"

html_theme = "sphinx_rtd_theme"
html_static_path = []
htmlhelp_basename = "shapephasedoc"
