#!/usr/bin/env python

import os
from setuptools import setup, find_packages
from anyonkin_pkg import metadata

cwd = os.path.abspath(os.path.dirname(__file__))

with open(os.path.join(cwd, "README.md")) as readme_file:
    long_description = readme_file.read()

setup(
    name = metadata.package,
    version = metadata.version,
    description = metadata.description,
    url = metadata.url,
    download_url = metadata.download_url,
    author = metadata.authors[0],
    author_email = metadata.emails[0],
    license = metadata.license,
    long_description = long_description,
    long_description_content_type = 'text/markdown',
    keywords = metadata.keywords,
    python_requires = '>=3.8',
    install_requires = ['numpy', 'scipy', 'xxhash', 'psutil'],
    extras_require = {'tests': ['pytest']},
    packages = find_packages(exclude=['tests']),
    entry_points = {
        'console_scripts': [
            # CLI command=package.module:function
            'anyonkin=anyonkin_pkg.anyonkin:main',
        ],
    },
    classifiers = [
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Operating System :: POSIX :: Linux',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3 :: Only',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Topic :: Scientific/Engineering :: Physics',
    ],
)
