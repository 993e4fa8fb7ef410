# -*- coding: utf-8 -*-

import anyonkin_pkg.metadata as metadata

# pylint: disable-all

__version__ = metadata.version
__author__ = metadata.authors[0]
__license__ = metadata.license
__copyright__ = metadata.copyright
