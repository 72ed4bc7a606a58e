//! C ABI for the bergman-spectra library.
//!
//! Conventions:
//! - All objects are opaque handles created by `bs_*_new`/`bs_*_compute` and
//!   released by the matching `bs_*_free`. Handles are never shared across
//!   threads by the caller without external synchronization.
//! - Functions returning `BsStatus` report `BS_OK` (0) on success; on any
//!   failure the thread-local message retrieved by `bs_last_error` describes
//!   the problem.
//! - Degree and multi-index buffers are caller-allocated; the `*_len`
//!   accessors report the required sizes.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::slice;

use bergman_spectra::combinatorics::enumerate_multi_indices;
use bergman_spectra::quadrature::QuadratureSpec;
use bergman_spectra::representation::isotypic_decomposition;
use bergman_spectra::symbols::{make_symbol, BlockPartition};
use bergman_spectra::toeplitz::{block_radial_spectrum, toeplitz_matrix, Method, SpectrumTable};
use bergman_spectra::SpaceParams;

/// Status codes returned by fallible entry points.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsStatus {
    /// Success.
    BsOk = 0,
    /// A pointer argument was null or an index was out of range.
    BsErrArgument = 1,
    /// Parameters failed validation (bad n/m, partition, symbol family, ...).
    BsErrInvalid = 2,
    /// The computation failed (non-convergence, invariance mismatch, ...).
    BsErrCompute = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Returns the message for the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread; the
/// caller must not free it.
#[no_mangle]
pub extern "C" fn bs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Opaque spectrum table: eigenvalues per isotypic component.
pub struct BsSpectrum {
    table: SpectrumTable,
}

/// Opaque isotypic decomposition.
pub struct BsDecomposition {
    degrees: Vec<Vec<u32>>,
    dimensions: Vec<usize>,
}

/// Opaque dense complex operator matrix (row-major, interleaved re/im).
pub struct BsMatrix {
    dim: usize,
    entries: Vec<f64>,
    error_estimate: f64,
}

struct SymbolArgs<'a> {
    family: &'a str,
    params: std::collections::BTreeMap<String, f64>,
}

unsafe fn read_symbol_args<'a>(
    family: *const c_char,
    param_names: *const *const c_char,
    param_values: *const f64,
    num_params: usize,
) -> Result<SymbolArgs<'a>, ()> {
    if family.is_null() || (num_params > 0 && (param_names.is_null() || param_values.is_null())) {
        set_error("null symbol arguments");
        return Err(());
    }
    let family = match CStr::from_ptr(family).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("symbol family is not valid UTF-8");
            return Err(());
        }
    };
    let mut params = std::collections::BTreeMap::new();
    if num_params > 0 {
        let names = slice::from_raw_parts(param_names, num_params);
        let values = slice::from_raw_parts(param_values, num_params);
        for (&name, &value) in names.iter().zip(values.iter()) {
            if name.is_null() {
                set_error("null parameter name");
                return Err(());
            }
            match CStr::from_ptr(name).to_str() {
                Ok(key) => {
                    params.insert(key.to_string(), value);
                }
                Err(_) => {
                    set_error("parameter name is not valid UTF-8");
                    return Err(());
                }
            }
        }
    }
    Ok(SymbolArgs { family, params })
}

unsafe fn read_partition(blocks: *const usize, num_blocks: usize, n: usize) -> Option<BlockPartition> {
    let partition = if blocks.is_null() || num_blocks == 0 {
        BlockPartition::full(n)
    } else {
        match BlockPartition::new(slice::from_raw_parts(blocks, num_blocks).to_vec()) {
            Ok(p) => p,
            Err(e) => {
                set_error(&e.to_string());
                return None;
            }
        }
    };
    if partition.n() != n {
        set_error(&format!("partition sums to {}, expected n = {n}", partition.n()));
        return None;
    }
    Some(partition)
}

/// Computes the closed-form spectrum of the Toeplitz operator for a catalogue
/// symbol invariant under the block group given by `blocks` (pass null/0 for
/// the full group U(n)). Returns null on failure; see `bs_last_error`.
///
/// # Safety
/// `blocks` must point to `num_blocks` readable `size_t`s (or be null);
/// `family` must be a NUL-terminated string; `param_names`/`param_values`
/// must point to `num_params` readable elements each.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_compute(
    n: usize,
    m: u32,
    blocks: *const usize,
    num_blocks: usize,
    family: *const c_char,
    param_names: *const *const c_char,
    param_values: *const f64,
    num_params: usize,
    quadrature_order: usize,
) -> *mut BsSpectrum {
    let Ok(args) = read_symbol_args(family, param_names, param_values, num_params) else {
        return ptr::null_mut();
    };
    let Some(partition) = read_partition(blocks, num_blocks, n) else {
        return ptr::null_mut();
    };
    let result = (|| {
        let params = SpaceParams::new(n, m)?;
        let symbol = make_symbol(args.family, &args.params, n, Some(&partition))?;
        let order = enumerate_multi_indices(n, m)?;
        let spec = QuadratureSpec::with_order(quadrature_order.max(2))?;
        block_radial_spectrum(params, &partition, &symbol, &spec, &order)
    })();
    match result {
        Ok(table) => Box::into_raw(Box::new(BsSpectrum { table })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Number of isotypic components (spectrum entries).
///
/// # Safety
/// `spectrum` must be a live handle from its `*_compute` constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_len(spectrum: *const BsSpectrum) -> usize {
    if spectrum.is_null() {
        return 0;
    }
    unsafe { (*spectrum).table.entries.len() }
}

/// Number of blocks in the partition (length of each degree vector).
///
/// # Safety
/// `spectrum` must be a live handle from its `*_compute` constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_num_blocks(spectrum: *const BsSpectrum) -> usize {
    if spectrum.is_null() {
        return 0;
    }
    unsafe { (*spectrum).table.partition.num_blocks() }
}

/// Reads entry `index`: its degree vector (buffer of `bs_spectrum_num_blocks`
/// u32s), eigenvalue, and component dimension. Any output pointer may be null
/// to skip that field.
///
/// # Safety
/// `degrees_out` must have room for `bs_spectrum_num_blocks` elements when
/// non-null; other pointers must be writable when non-null.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_entry(
    spectrum: *const BsSpectrum,
    index: usize,
    degrees_out: *mut u32,
    eigenvalue_out: *mut f64,
    dimension_out: *mut usize,
) -> BsStatus {
    if spectrum.is_null() {
        set_error("null spectrum handle");
        return BsStatus::BsErrArgument;
    }
    let table = &(*spectrum).table;
    let Some((degrees, eigenvalue, dimension)) = table.entries.get(index) else {
        set_error(&format!(
            "entry index {index} out of range (len {})",
            table.entries.len()
        ));
        return BsStatus::BsErrArgument;
    };
    if !degrees_out.is_null() {
        let out = slice::from_raw_parts_mut(degrees_out, degrees.len());
        out.copy_from_slice(degrees);
    }
    if !eigenvalue_out.is_null() {
        *eigenvalue_out = *eigenvalue;
    }
    if !dimension_out.is_null() {
        *dimension_out = *dimension;
    }
    BsStatus::BsOk
}

/// Quadrature error estimate attached to the table.
///
/// # Safety
/// `spectrum` must be a live handle from its `*_compute` constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_error_estimate(spectrum: *const BsSpectrum) -> f64 {
    if spectrum.is_null() {
        return f64::NAN;
    }
    unsafe { (*spectrum).table.error_estimate }
}

/// Releases a spectrum handle. Null is ignored.
///
/// # Safety
/// `spectrum` must come from `bs_spectrum_compute` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bs_spectrum_free(spectrum: *mut BsSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Computes the isotypic decomposition of the space of polynomials of degree
/// at most `m` in `n` variables under the block group. Returns null on
/// failure.
///
/// # Safety
/// `blocks` must point to `num_blocks` readable `size_t`s (or be null).
#[no_mangle]
pub unsafe extern "C" fn bs_decomposition_compute(
    n: usize,
    m: u32,
    blocks: *const usize,
    num_blocks: usize,
) -> *mut BsDecomposition {
    let Some(partition) = read_partition(blocks, num_blocks, n) else {
        return ptr::null_mut();
    };
    let result = (|| {
        let params = SpaceParams::new(n, m)?;
        let order = enumerate_multi_indices(n, m)?;
        isotypic_decomposition(params, &partition, &order)
    })();
    match result {
        Ok(decomposition) => {
            let degrees = decomposition
                .components()
                .iter()
                .map(|c| c.degrees.clone())
                .collect();
            let dimensions = decomposition
                .components()
                .iter()
                .map(|c| c.dimension)
                .collect();
            Box::into_raw(Box::new(BsDecomposition {
                degrees,
                dimensions,
            }))
        }
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Number of isotypic components.
///
/// # Safety
/// `decomposition` must be a live handle from its `*_compute` constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn bs_decomposition_len(decomposition: *const BsDecomposition) -> usize {
    if decomposition.is_null() {
        return 0;
    }
    unsafe { (*decomposition).dimensions.len() }
}

/// Reads component `index`: degree vector and dimension.
///
/// # Safety
/// `degrees_out`, when non-null, must have room for one u32 per block.
#[no_mangle]
pub unsafe extern "C" fn bs_decomposition_component(
    decomposition: *const BsDecomposition,
    index: usize,
    degrees_out: *mut u32,
    dimension_out: *mut usize,
) -> BsStatus {
    if decomposition.is_null() {
        set_error("null decomposition handle");
        return BsStatus::BsErrArgument;
    }
    let d = &*decomposition;
    let Some(degrees) = d.degrees.get(index) else {
        set_error(&format!(
            "component index {index} out of range (len {})",
            d.degrees.len()
        ));
        return BsStatus::BsErrArgument;
    };
    if !degrees_out.is_null() {
        slice::from_raw_parts_mut(degrees_out, degrees.len()).copy_from_slice(degrees);
    }
    if !dimension_out.is_null() {
        *dimension_out = d.dimensions[index];
    }
    BsStatus::BsOk
}

/// Releases a decomposition handle. Null is ignored.
///
/// # Safety
/// `decomposition` must come from `bs_decomposition_compute` and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn bs_decomposition_free(decomposition: *mut BsDecomposition) {
    if !decomposition.is_null() {
        drop(Box::from_raw(decomposition));
    }
}

/// Builds the Toeplitz matrix of a catalogue symbol by Monte Carlo
/// (`mc_count > 0`, seeded) or quadrature (`mc_count == 0`, using
/// `quadrature_order`). Returns null on failure.
///
/// # Safety
/// Same pointer contracts as `bs_spectrum_compute`.
#[no_mangle]
pub unsafe extern "C" fn bs_matrix_compute(
    n: usize,
    m: u32,
    family: *const c_char,
    param_names: *const *const c_char,
    param_values: *const f64,
    num_params: usize,
    quadrature_order: usize,
    mc_count: usize,
    mc_seed: u64,
) -> *mut BsMatrix {
    let Ok(args) = read_symbol_args(family, param_names, param_values, num_params) else {
        return ptr::null_mut();
    };
    let result = (|| {
        let params = SpaceParams::new(n, m)?;
        let symbol = make_symbol(args.family, &args.params, n, None)?;
        let order = enumerate_multi_indices(n, m)?;
        let method = if mc_count > 0 {
            Method::MonteCarlo {
                count: mc_count,
                seed: mc_seed,
            }
        } else {
            Method::Quadrature(QuadratureSpec::with_order(quadrature_order.max(2))?)
        };
        toeplitz_matrix(params, &order, &symbol, &method)
    })();
    match result {
        Ok(t) => {
            let dim = t.dim();
            let mut entries = Vec::with_capacity(2 * dim * dim);
            for q in 0..dim {
                for p in 0..dim {
                    let e = t.entries()[(q, p)];
                    entries.push(e.re);
                    entries.push(e.im);
                }
            }
            Box::into_raw(Box::new(BsMatrix {
                dim,
                entries,
                error_estimate: t.error_estimate(),
            }))
        }
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Matrix dimension (the space dimension C(n+m, n)).
///
/// # Safety
/// `matrix` must be a live handle from its `*_compute` constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn bs_matrix_dim(matrix: *const BsMatrix) -> usize {
    if matrix.is_null() {
        return 0;
    }
    unsafe { (*matrix).dim }
}

/// Error estimate attached to the matrix.
///
/// # Safety
/// `matrix` must be a live handle from its `*_compute` constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn bs_matrix_error_estimate(matrix: *const BsMatrix) -> f64 {
    if matrix.is_null() {
        return f64::NAN;
    }
    unsafe { (*matrix).error_estimate }
}

/// Copies the row-major entries as interleaved re/im pairs into `out`
/// (`2 * dim * dim` doubles).
///
/// # Safety
/// `out` must have room for `2 * bs_matrix_dim(...)^2` doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_matrix_entries(matrix: *const BsMatrix, out: *mut f64) -> BsStatus {
    if matrix.is_null() || out.is_null() {
        set_error("null matrix handle or output buffer");
        return BsStatus::BsErrArgument;
    }
    let m = &*matrix;
    slice::from_raw_parts_mut(out, m.entries.len()).copy_from_slice(&m.entries);
    BsStatus::BsOk
}

/// Releases a matrix handle. Null is ignored.
///
/// # Safety
/// `matrix` must come from `bs_matrix_compute` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bs_matrix_free(matrix: *mut BsMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}
