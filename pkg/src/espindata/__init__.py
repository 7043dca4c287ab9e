"""Governed curation platform for electrospinning experiment records.

The package is organised around a process-structure-property record model:
typed units and records (:mod:`espindata.units`, :mod:`espindata.records`),
a controlled morphology vocabulary (:mod:`espindata.emcv`), a validation
rule catalog (:mod:`espindata.evvr`), a moderated submission lifecycle
(:mod:`espindata.moderation`), durable storage (:mod:`espindata.store`),
a filter/summary query engine (:mod:`espindata.query`) and deterministic
versioned releases (:mod:`espindata.release`).  The HTTP service lives in
:mod:`espindata.service` and the operator CLI in :mod:`espindata.cli`.
"""

__version__ = "0.1.0"
