# pylint: disable-all
"""Sphinx configuration for the nsp-lab documentation."""
from importlib import metadata

release = metadata.version("nsp-lab")
version = ".".join(release.split(".")[:2])

project = "nsp-lab"
author = "nsp-lab developers"

extensions = [
    "autoapi.extension",
    "myst_parser",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
]

autoapi_type = "python"
autoapi_dirs = ["../nsp_lab/"]
autoapi_ignore = ["*/tests/*"]
autoapi_options = ["members", "undoc-members", "show-inheritance", "show-module-summary"]
autoapi_member_order = "bysource"

napoleon_google_docstring = True
napoleon_numpy_docstring = False

myst_enable_extensions = ["dollarmath"]

source_suffix = {
    ".rst": "restructuredtext",
    ".md": "markdown",
}
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

html_theme = "sphinx_rtd_theme"
html_title = f"nsp-lab {release}"
