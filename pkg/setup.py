from setuptools import setup, find_packages

setup(
    name='sparse-grid-gp',
    author='Newton',
    version='0.1',
    packages=find_packages(),
    install_requires=[
        'numpy',
        'pandas',
        'scipy',
    ],
    entry_points={
        'console_scripts': ['sparse-grid-gp=sparse_grid_gp.cli:main'],
    },
)
