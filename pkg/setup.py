import os
import sys
from setuptools import setup, find_packages

print("Installing travel_od.")

if sys.version_info.major != 3 or sys.version_info.minor < 8:
    print("This package needs Python 3.8 or newer, but you are running "
          "Python {}.{}. The installation will likely fail.".format(sys.version_info.major, sys.version_info.minor))

def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()

setup(
    name='travel_od',
    version='1.0.0',
    packages=find_packages(exclude=['tests', 'tests.*']),
    package_data={
        'travel_od': ['parameters/*.yaml', 'sample_data/*'],
    },
    install_requires=[
        'numpy',
        'pandas',
        'networkx',
        'scipy',
        'osmium>=3.0',
        'matplotlib',
        'hydra-core>=1.2',
        'omegaconf',
        'PyYAML',
    ],
    extras_require={
        'tests': ['pytest'],
    },
    entry_points={
        'console_scripts': ['travel-od=travel_od.pipeline:main'],
    },
    python_requires='>=3.8',
    description='Road network travel time reliability, congestion metrics and OD demand estimation from observed travel times.',
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
)
