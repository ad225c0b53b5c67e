# -*- coding: utf-8 -*-

'''
setup for mstack

Created on  2024-03-18

@author: Stacking Development Group <mstack@users.noreply.github.com>
@copyright: 2024 The mstack developers.
All rights reserved.
@license: GPL v2.0
'''

import re
from setuptools import setup, find_packages


def getVersion():
    """
    Retrieve the version number from the __init__ file
    """
    version = '0.0.0'
    with open('mstack/__init__.py', 'r') as f:
        contents = f.read().strip()

    m = re.search(r"__version__ = '([\d\.]+)'", contents)
    if m:
        version = m.group(1)
    return version


setup(
    name="mstack",
    version=getVersion(),
    author='Stacking Development Group <mstack@users.noreply.github.com>',
    author_email='mstack@users.noreply.github.com',
    description='Multi-study stacking for generalist and specialist prediction',
    license='LICENSE',
    include_package_data=True,
    packages=find_packages(),
    long_description='Data-reuse, within-study and cross-set stacking of study-specific prediction functions, '
        'with generalist shrinkage of specialists and simulation tooling',
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    install_requires = [
        'Django>4, <5',
        'djangorestframework==3.15.2',
        'numpy>=1.22',
        'scipy>=1.8',
        'pandas>=1.4',
        'joblib>=1.1',
    ],
)
