"""
Services Package.

Contains the computational services, one module per concern:
- algebra_service: local algebras, maps, condition (†), flatness
- module_service: modules, Hom, base change, resolutions, Ext
- decomposition: isomorphism tests and Krull–Remak–Schmidt
- complex_service: bounded complexes, Hom and Koszul complexes
- ascent_service: compatible structures, V(M), ring retracts
- pid_service: the local PID model of completion
- extended_service: extended modules along finite free extensions
- gallery: counterexamples reproduced with their claims checked
"""
