#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""The setup script."""

from setuptools import setup, find_packages

with open('README.rst') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

requirements = ['numpy', 'scipy', 'matplotlib', 'xxhash']

setup_requirements = ['pytest-runner', ]

test_requirements = ['pytest', 'hypothesis', ]

setup(
    author="abers developers",
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    description="Operator splitting solver for the augmented Burgers equation, with its convergence "
                "and large-time experiments",
    install_requires=requirements,
    license="Apache Software License 2.0",
    long_description=readme + '\n\n' + history,
    include_package_data=True,
    keywords='abers augmented burgers splitting crank-nicolson engquist-osher',
    name='abers',
    packages=find_packages(include=['abers']),
    entry_points={
          'console_scripts': [
              'abers = abers.__main__:main'
          ]
    },
    python_requires='>=3.8',
    setup_requires=setup_requirements,
    test_suite='tests',
    tests_require=test_requirements,
    version='0.1.0',
    zip_safe=False,
)
