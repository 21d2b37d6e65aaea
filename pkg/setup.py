#  ___________________________________________________________________________
#
#  CAIRN: Causal Analysis In latent Relation Networks
#  This software is distributed under the Revised BSD License.
#  ___________________________________________________________________________

from setuptools import setup, find_packages

DISTNAME = 'cairn'
VERSION = '0.1.0'
PACKAGES = find_packages(exclude=['examples', 'examples.*'])
DESCRIPTION = 'CAIRN: Causal Analysis In latent Relation Networks.'
LONG_DESCRIPTION = open('README.md').read()
LICENSE = 'Revised BSD'
URL = 'no-url-yet'

setuptools_kwargs = {
    'zip_safe': False,
    'include_package_data': True,
    'python_requires': '>=3.8',
    'install_requires': ['numpy', 'scipy', 'pandas', 'networkx', 'joblib>=1.3', 'scikit-learn',
                         'matplotlib', 'seaborn', 'tomli; python_version < "3.11"'],
    'extras_require': {'test': ['pytest', 'parameterized']},
    'entry_points': {'console_scripts': ['cairn = cairn.cli:main']},
}

setup(name=DISTNAME,
      version=VERSION,
      packages=PACKAGES,
      description=DESCRIPTION,
      long_description=LONG_DESCRIPTION,
      long_description_content_type='text/markdown',
      license=LICENSE,
      url=URL,
      **setuptools_kwargs)
