//! C interface to `qlspec-core`.
//!
//! Matter systems and field states are opaque handles created by the
//! `qls_*_new*` functions and released with the matching `*_free`. Every
//! fallible call returns a [`QlsStatus`]; on failure the message is kept
//! per thread and read with [`qls_last_error`].

use std::cell::RefCell;
use std::ffi::CString;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use libc::{c_char, size_t};
use qlspec_core::field::{prepare_state, FieldMode, FieldState, ModeState, StateSpec};
use qlspec_core::matter::{self, MatterSystem};
use qlspec_core::operator::{OperatorMatrix, C64};
use qlspec_core::response::{self, Order, SignalKind};
use qlspec_core::superop;
use qlspec_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QlsStatus {
    Ok = 0,
    Io = 1,
    Argument = 2,
    Size = 3,
    Unsupported = 4,
    Numerical = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

impl From<&Error> for QlsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Argument(_) | Error::Config(_) | Error::Contract(_) => QlsStatus::Argument,
            Error::Size { .. } => QlsStatus::Size,
            Error::Unsupported(_) => QlsStatus::Unsupported,
            Error::Numerical(_) => QlsStatus::Numerical,
            Error::Io(_) => QlsStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QlsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for QlsComplex {
    fn from(z: C64) -> Self {
        QlsComplex { re: z.re, im: z.im }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QlsModeKind {
    Vacuum = 0,
    /// `a` is the photon number.
    Fock = 1,
    /// `a + ib` is the amplitude.
    Coherent = 2,
    /// `a` is the mean photon number.
    Thermal = 3,
    /// `a` is the squeezing magnitude, `b` the phase.
    Squeezed = 4,
    CatEven = 5,
    CatOdd = 6,
}

/// One field mode and its state.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct QlsMode {
    pub frequency: f64,
    pub coupling: f64,
    pub truncation: size_t,
    pub kind: QlsModeKind,
    pub a: f64,
    pub b: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub enum QlsSignalKind {
    Quantum = 0,
    Classical = 1,
    PAveraged = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub enum QlsOrder {
    Linear = 1,
    Third = 3,
}

/// One resonance of the fluctuation-dissipation check.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QlsFdtLine {
    pub omega: f64,
    pub weight_plus_plus: f64,
    pub weight_plus_minus: f64,
    pub ratio: f64,
    pub expected: f64,
}

pub struct QlsMatter(MatterSystem);

pub struct QlsField(FieldState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> QlsStatus
where
    F: FnOnce() -> Result<(), (QlsStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QlsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QlsStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (QlsStatus, String) {
    (QlsStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (QlsStatus, String) {
    (QlsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QlsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (QlsStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn view<'a, T>(p: *const T, n: size_t, what: &str) -> Result<&'a [T], (QlsStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

/// Ground state for an infinite `beta_t`, otherwise the thermal state.
fn initial_state(sys: &MatterSystem, beta_t: f64) -> Result<OperatorMatrix, (QlsStatus, String)> {
    if beta_t == f64::INFINITY {
        Ok(sys.ground_state())
    } else {
        matter::thermal_state(sys, beta_t).map_err(core_err)
    }
}

fn mode_state(m: &QlsMode) -> Result<ModeState, (QlsStatus, String)> {
    Ok(match m.kind {
        QlsModeKind::Vacuum => ModeState::Vacuum,
        QlsModeKind::Fock => {
            if !(m.a >= 0.0) || m.a.fract() != 0.0 {
                return Err((QlsStatus::Argument, format!("photon number must be a non-negative integer, got {}", m.a)));
            }
            ModeState::Fock(m.a as usize)
        }
        QlsModeKind::Coherent => ModeState::Coherent(C64::new(m.a, m.b)),
        QlsModeKind::Thermal => ModeState::Thermal(m.a),
        QlsModeKind::Squeezed => ModeState::Squeezed { r: m.a, phi: m.b },
        QlsModeKind::CatEven => ModeState::Cat { beta: C64::new(m.a, m.b), even: true },
        QlsModeKind::CatOdd => ModeState::Cat { beta: C64::new(m.a, m.b), even: false },
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Two-level system with transition frequency `omega0` and dipole `mu`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qls_matter_new_two_level(
    omega0: f64,
    mu: f64,
    epsilon: f64,
    out: *mut *mut QlsMatter,
) -> QlsStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let sys = matter::two_level(omega0, mu, epsilon).map_err(core_err)?;
        *slot = Box::into_raw(Box::new(QlsMatter(sys)));
        Ok(())
    })
}

/// Truncated harmonic oscillator with `levels` levels.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qls_matter_new_harmonic(
    levels: size_t,
    omega0: f64,
    mu: f64,
    epsilon: f64,
    out: *mut *mut QlsMatter,
) -> QlsStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let sys = matter::harmonic(levels, omega0, mu, epsilon).map_err(core_err)?;
        *slot = Box::into_raw(Box::new(QlsMatter(sys)));
        Ok(())
    })
}

/// Ladder of `n + 1` levels with the given spacings and nearest-neighbour dipoles.
///
/// # Safety
/// `spacings` and `dipoles` must each point to `n` readable doubles and `out`
/// to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qls_matter_new_ladder(
    spacings: *const f64,
    dipoles: *const f64,
    n: size_t,
    epsilon: f64,
    out: *mut *mut QlsMatter,
) -> QlsStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let s = view(spacings, n, "spacings")?;
        let d = view(dipoles, n, "dipoles")?;
        let sys = matter::ladder(s, d, epsilon).map_err(core_err)?;
        *slot = Box::into_raw(Box::new(QlsMatter(sys)));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a handle from `qls_matter_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qls_matter_free(m: *mut QlsMatter) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Hilbert-space dimension, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live matter handle.
#[no_mangle]
pub unsafe extern "C" fn qls_matter_dim(m: *const QlsMatter) -> size_t {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// Product field state over `n` modes.
///
/// # Safety
/// `modes` must point to `n` readable entries and `out` to writable storage
/// for one handle.
#[no_mangle]
pub unsafe extern "C" fn qls_field_new(modes: *const QlsMode, n: size_t, out: *mut *mut QlsField) -> QlsStatus {
    guard(|| {
        let slot = self::out(out, "out")?;
        let entries = view(modes, n, "modes")?;
        let fm: Vec<FieldMode> = entries.iter().map(|m| FieldMode::new(m.frequency, m.coupling, m.truncation)).collect();
        let states = entries.iter().map(mode_state).collect::<Result<Vec<_>, _>>()?;
        let f = prepare_state(&fm, StateSpec::Product(states)).map_err(core_err)?;
        *slot = Box::into_raw(Box::new(QlsField(f)));
        Ok(())
    })
}

/// # Safety
/// `f` must be NULL or a handle from `qls_field_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qls_field_free(f: *mut QlsField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Dimension of the joint field space, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn qls_field_dim(f: *const QlsField) -> size_t {
    f.as_ref().map_or(0, |f| f.0.dim())
}

/// Linear susceptibility at `omega`. Pass `INFINITY` as `beta_t` for the
/// ground state.
///
/// # Safety
/// `m` must be a live matter handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qls_chi1(m: *const QlsMatter, beta_t: f64, omega: f64, out: *mut QlsComplex) -> QlsStatus {
    guard(|| {
        let sys = &deref(m, "matter")?.0;
        let slot = self::out(out, "out")?;
        let rho = initial_state(sys, beta_t)?;
        *slot = response::chi1(sys, &rho, omega).map_err(core_err)?.into();
        Ok(())
    })
}

/// Permutation-symmetrized third-order susceptibility. `omega` must equal
/// `w1 + w2 + w3`.
///
/// # Safety
/// `m` must be a live matter handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qls_chi3(
    m: *const QlsMatter,
    beta_t: f64,
    omega: f64,
    w1: f64,
    w2: f64,
    w3: f64,
    out: *mut QlsComplex,
) -> QlsStatus {
    guard(|| {
        let sys = &deref(m, "matter")?.0;
        let slot = self::out(out, "out")?;
        let rho = initial_state(sys, beta_t)?;
        *slot = response::chi3(sys, &rho, omega, [w1, w2, w3]).map_err(core_err)?.into();
        Ok(())
    })
}

/// Detected signal on mode `detect` at the current tuning. `gates` may be
/// NULL; otherwise it receives one gate per diagram (2 for linear order, 4
/// for third order).
///
/// # Safety
/// Handles must be live, `total` writable, and `gates` NULL or writable for
/// the number of entries above.
#[no_mangle]
pub unsafe extern "C" fn qls_signal(
    m: *const QlsMatter,
    beta_t: f64,
    f: *const QlsField,
    detect: size_t,
    kind: QlsSignalKind,
    order: QlsOrder,
    total: *mut f64,
    gates: *mut QlsComplex,
) -> QlsStatus {
    guard(|| {
        let sys = &deref(m, "matter")?.0;
        let field = &deref(f, "field")?.0;
        let slot = self::out(total, "total")?;
        let rho = initial_state(sys, beta_t)?;
        let kind = match kind {
            QlsSignalKind::Quantum => SignalKind::Quantum,
            QlsSignalKind::Classical => SignalKind::Classical,
            QlsSignalKind::PAveraged => SignalKind::PAveraged,
        };
        let order = match order {
            QlsOrder::Linear => Order::Linear,
            QlsOrder::Third => Order::Third,
        };
        let table = response::signal(sys, &rho, field, detect, kind, order).map_err(core_err)?;
        let row = &table.rows[0];
        *slot = row.total;
        if !gates.is_null() {
            for (i, g) in row.gates.iter().enumerate() {
                *gates.add(i) = (*g).into();
            }
        }
        Ok(())
    })
}

/// Line-resolved fluctuation-dissipation check at inverse temperature
/// `beta_t`. Writes up to `cap` lines and stores the line count in `count`;
/// returns `BufferTooSmall` when `cap` is short, with `count` still set.
///
/// # Safety
/// `m` must be a live matter handle, `lines` NULL (with `cap == 0`) or
/// writable for `cap` entries, and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn qls_fdt_lines(
    m: *const QlsMatter,
    beta_t: f64,
    lines: *mut QlsFdtLine,
    cap: size_t,
    count: *mut size_t,
) -> QlsStatus {
    guard(|| {
        let sys = &deref(m, "matter")?.0;
        let n_out = self::out(count, "count")?;
        let table = superop::fdt_check(sys, beta_t, &[]).map_err(core_err)?;
        *n_out = table.lines.len();
        if table.lines.len() > cap {
            return Err((QlsStatus::BufferTooSmall, format!("{} lines, buffer holds {cap}", table.lines.len())));
        }
        if lines.is_null() && !table.lines.is_empty() {
            return Err(null("lines"));
        }
        for (i, l) in table.lines.iter().enumerate() {
            *lines.add(i) = QlsFdtLine {
                omega: l.omega,
                weight_plus_plus: l.weight_plus_plus,
                weight_plus_minus: l.weight_plus_minus,
                ratio: l.ratio,
                expected: l.expected,
            };
        }
        Ok(())
    })
}
