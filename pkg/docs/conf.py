#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# abers documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))

os.environ.setdefault("MPLBACKEND", "Agg")  # autodoc imports the figure module
import abers

# -- General configuration ---------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.viewcode', 'sphinx.ext.mathjax']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'abers'
copyright = u"abers developers"
author = u"abers developers"

version = abers.__version__
release = abers.__version__

language = None

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

pygments_style = 'sphinx'

todo_include_todos = False


# -- Options for HTML output -------------------------------------------

html_theme = 'alabaster'

html_static_path = ['_static']


# -- Options for HTMLHelp output ---------------------------------------

htmlhelp_basename = 'abersdoc'


# -- Options for LaTeX output ------------------------------------------

latex_elements = {}

latex_documents = [
    (master_doc, 'abers.tex',
     u'abers Documentation',
     u'abers developers', 'manual'),
]


# -- Options for manual page output ------------------------------------

man_pages = [
    (master_doc, 'abers',
     u'abers Documentation',
     [author], 1)
]


# -- Options for Texinfo output ----------------------------------------

texinfo_documents = [
    (master_doc, 'abers',
     u'abers Documentation',
     author,
     'abers',
     'Splitting solver for the augmented Burgers equation.',
     'Miscellaneous'),
]
