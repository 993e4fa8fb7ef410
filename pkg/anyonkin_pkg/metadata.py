# -*- coding: utf-8 -*-
"""
anyonkin project metadata.
"""

# pylint: disable-all

# The package name, which is also the "UNIX name" for the project.
package = 'anyonkin'
version = '0.3.1'
description = "Deterministic kinetic solver for the anyon (Haldane " \
              "statistics) Boltzmann equation in a periodic slab, " \
              "with a-priori estimate diagnostics."
summary = description
project = 'anyonkin slab kinetic solver'
project_no_spaces = project.replace(' ', '')
url = 'https://github.com/mrsimoes/anyonkin'
download_url = 'https://github.com/mrsimoes/anyonkin/archive/v%s.tar.gz' % version
keywords = 'boltzmann kinetic anyon haldane fermion boson collision solver'
authors = ['Miguel Simoes']
authors_string = ', '.join(authors)
emails = ['miguelrsimoes@yahoo.com']
license = 'GNU General Public License v3'
copyright = '(C) 2021-2022 ' + authors_string
