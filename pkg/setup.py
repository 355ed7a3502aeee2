from setuptools import setup


setup(
    name='vpfplab',
    description="Particle experiments for the regularized "
                "Vlasov-Poisson-Fokker-Planck system",

    license="Apache License 2.0",

    setup_requires=open('requirements.setup.txt'),
    install_requires=['numpy', 'scipy', 'path.py', 'path < 17', 'ipython'],

    use_scm_version={'local_scheme': 'dirty-tag'},

    packages=[
        'vpfplab',
        'vpfplab.kernels',
        'vpfplab.dynamics',
        'vpfplab.experiments',
    ],
    entry_points={
        'console_scripts': ['vpfplab=vpfplab:run'],
    },

    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    keywords=[
        'vlasov', 'fokker-planck', 'mean-field', 'particle', 'coulomb',
        'wasserstein',
    ],
)
