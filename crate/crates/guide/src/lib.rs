//! Runs every code block of the book under `book/src` as a doctest.
//!
//! mdbook cannot test snippets that depend on workspace crates, so each
//! chapter is pulled in as the doc comment of an empty module.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fock-space.md")]
mod fock_space {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/hamiltonians.md")]
mod hamiltonians {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/spectra.md")]
mod spectra {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/metric.md")]
mod metric {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/ladder-algebra.md")]
mod ladder_algebra {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/perturbation.md")]
mod perturbation {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
