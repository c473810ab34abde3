use super::{closed_form_max_sum_rate, optimize_sum_rate, CapacityError, RegionModel};

/// Gap below which two optimized sum-rates are reported as equal.
pub const COMPARISON_TOLERANCE: f64 = 1e-4;

/// Maximum sum-rates of the EIA, EIP:DIA and EU:DIA models side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub t: usize,
    pub ell: usize,
    /// Closed form.
    pub eia: f64,
    pub eip_dia: f64,
    pub eu_dia: f64,
    pub gap_eia_eip: f64,
    pub gap_eip_eu: f64,
    pub eip_equals_eia: bool,
    pub eip_strictly_below_eia: bool,
    pub eu_strictly_below_eip: bool,
}

impl ComparisonReport {
    /// `EU:DIA ≤ EIP:DIA ≤ EIA`, each up to a small numerical slack.
    pub fn nesting_holds(&self) -> bool {
        self.eu_dia <= self.eip_dia + 1e-6 && self.eip_dia <= self.eia + 1e-6
    }
}

pub fn compare_models(t: usize, ell: usize) -> Result<ComparisonReport, CapacityError> {
    let eia = closed_form_max_sum_rate(t as u64, ell as u64).value;
    let eip_dia = optimize_sum_rate(RegionModel::EipDia, t, ell, None)?.rates.sum_rate();
    let eu_dia = optimize_sum_rate(RegionModel::EuDia, t, ell, None)?.rates.sum_rate();
    let gap_eia_eip = eia - eip_dia;
    let gap_eip_eu = eip_dia - eu_dia;
    Ok(ComparisonReport {
        t,
        ell,
        eia,
        eip_dia,
        eu_dia,
        gap_eia_eip,
        gap_eip_eu,
        eip_equals_eia: gap_eia_eip.abs() <= COMPARISON_TOLERANCE,
        eip_strictly_below_eia: gap_eia_eip > COMPARISON_TOLERANCE,
        eu_strictly_below_eip: gap_eip_eu > COMPARISON_TOLERANCE,
    })
}
