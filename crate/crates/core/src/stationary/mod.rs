//! Unperturbed channel states of the interacting pair and the stationary
//! Kohn-Sham ground state.

mod channels;
mod kohn_sham;

pub use channels::{
    assemble_channel, cm_eigenstate, oscillator_eigenfunction, rdm_offdiagonal, solve_relative_eigenstates, ChannelSet,
    ChannelState, RelativeSpectrum,
};
pub use kohn_sham::{
    hartree_direct, invert_ks_equation, ks_scf_ground_state, solve_in_potential, ExactShiftXc, ExchangeSic,
    HartreeSolver, KSGroundState, KsInversion, NonInteracting, ScfOptions, XcFunctional, XcInput, XcKind,
    DENSITY_FLOOR,
};

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenpairs of a real symmetric matrix, ascending; eigenvectors are the columns.
pub(crate) fn sorted_eigen(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Fixes the arbitrary sign of a real eigenvector: the first entry above 1e-3 of the
/// maximum modulus is made positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-3 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
