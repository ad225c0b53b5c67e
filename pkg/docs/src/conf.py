# Configuration file for the Sphinx documentation builder.
#
# This file only contains a selection of the most common options. For a full
# list see the documentation:
# http://www.sphinx-doc.org/en/master/config

# -- Path setup --------------------------------------------------------------

import os
import sys
import django
sys.path.insert(0, os.path.abspath('../..'))
os.environ['DJANGO_SETTINGS_MODULE'] = 'mstack.settings'
django.setup()

# -- Project information -----------------------------------------------------

project = 'mstack'
copyright = '2024, The mstack developers'
author = 'Stacking Development Group'


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.mathjax',
    'sphinx.ext.autosectionlabel',
]

autosectionlabel_prefix_document = True

autodoc_member_order = 'bysource'


# Add any paths that contain templates here, relative to this directory.
templates_path = ['_templates']

exclude_patterns = []


# -- Options for HTML output -------------------------------------------------

html_theme = "alabaster"

html_static_path = ['_static']


# --- Do not process dataclass plumbing in autodoc ---------------------------
def skip_plumbing(app, what, name, obj, skip, options):
    '''
    Don't need these
    '''
    skips = [
        '__doc__',
        '__module__',
        '__dict__',
        '__weakref__',
        '__dataclass_fields__',
        '__dataclass_params__',
        '_declared_fields',
    ]
    if what == 'class' and name in skips:
        return True
    return None


# -- Extension configuration -------------------------------------------------
def setup(app):
    app.connect('autodoc-skip-member', skip_plumbing)
