//! Published reference values used by the table commands and the tests.

/// One s-wave row: `(ν, E_BO, E_scaled, E_Pn, δ, ε_BO, ε_scaled)`.
pub type LevelRow0 = (u32, f64, f64, f64, f64, f64, f64);

/// One p-wave row: `(ν, E_BO, E_scaled, ε_BO, ε_scaled)`.
pub type LevelRow1 = (u32, f64, f64, f64, f64);

/// l = 0 levels (hartree). Row 30 lies above threshold.
pub const LEVELS_L0: [LevelRow0; 30] = [
    (1, -459.28810584, -459.28797088, -459.03816812, 0.250, 458.28810584, 458.28851520),
    (2, -115.00950131, -115.00936938, -114.75954203, 0.250, 114.00950131, 114.00991370),
    (3, -51.25422639, -51.25409833, -51.00424090, 0.250, 50.25422639, 50.25464265),
    (4, -28.93998669, -28.93986212, -28.68988551, 0.250, 27.93998669, 27.94040644),
    (5, -18.61185049, -18.61172801, -18.36152672, 0.250, 17.61185049, 17.61227233),
    (6, -13.00167067, -13.00154836, -12.75106023, 0.251, 12.00167067, 12.00209268),
    (7, -9.61898924, -9.61886541, -9.36812588, 0.251, 8.61898924, 8.61940973),
    (8, -7.42343727, -7.42331085, -7.17247138, 0.251, 6.42343727, 6.42385517),
    (9, -5.91797886, -5.91784964, -5.66713788, 0.251, 4.91797886, 4.91839396),
    (10, -4.84088720, -4.84075555, -4.59038168, 0.251, 3.84088720, 3.84129987),
    (11, -4.04378975, -4.04365618, -3.79370387, 0.250, 3.04378975, 3.04420050),
    (12, -3.43753603, -3.43740095, -3.18776506, 0.250, 2.43753603, 2.43794527),
    (13, -2.96591308, -2.96577681, -2.71620218, 0.250, 1.96591308, 1.96632113),
    (14, -2.59194272, -2.59180584, -2.34203147, 0.250, 1.59194272, 1.59235016),
    (15, -2.29036921, -2.29023270, -2.04016964, 0.250, 1.29036921, 1.29077702),
    (16, -2.04344058, -2.04330543, -1.79311784, 0.250, 1.04344058, 1.04384975),
    (17, -1.83852260, -1.83838880, -1.58836736, 0.250, 0.83852260, 0.83893312),
    (18, -1.66669147, -1.66655687, -1.41678447, 0.250, 0.66669147, 0.66710119),
    (19, -1.52177984, -1.52163968, -1.27157387, 0.250, 0.52177984, 0.52218400),
    (20, -1.39961222, -1.39945939, -1.14759542, 0.252, 0.39961222, 0.40000371),
    (21, -1.29734882, -1.29717481, -1.04090288, 0.256, 0.29734882, 0.29771913),
    (22, -1.21293458, -1.21273047, -0.94842597, 0.265, 0.21293458, 0.21327479),
    (23, -1.14468025, -1.14443786, -0.86774701, 0.277, 0.14468025, 0.14498218),
    (24, -1.09104749, -1.09075955, -0.79694126, 0.294, 0.09104749, 0.09130387),
    (25, -1.05068830, -1.05034841, -0.73446107, 0.316, 0.05068830, 0.05089273),
    (26, -1.02258176, -1.02218304, -0.67905054, 0.344, 0.02258176, 0.02272736),
    (27, -1.00600201, -1.00553517, -0.62968199, 0.376, 0.00600201, 0.00607949),
    (28, -1.00065727, -1.00012002, -0.58550787, 0.415, 0.00065727, 0.00066434),
    (29, -1.00004946, -0.99950777, -0.54582422, 0.454, 0.00004946, 0.00005209),
    (30, -0.99999650, -0.99945226, -0.51004241, 0.490, -0.00000350, -0.00000342),
];

/// l = 1 levels (hartree). Row 29 lies above threshold.
pub const LEVELS_L1: [LevelRow1; 29] = [
    (1, -115.00950985, -115.00937728, 114.00950985, 114.00992160),
    (2, -51.25422287, -51.25409434, 50.25422287, 50.25463866),
    (3, -28.93997500, -28.93985016, 27.93997500, 27.94039448),
    (4, -18.61183446, -18.61171187, 17.61183446, 17.61225619),
    (5, -13.00165510, -13.00153280, 12.00165510, 12.00207712),
    (6, -9.61897877, -9.61885498, 8.61897877, 8.61939931),
    (7, -7.42343471, -7.42330837, 6.42343471, 6.42385269),
    (8, -5.91798413, -5.91785500, 4.91798413, 4.91839932),
    (9, -4.84089719, -4.84076562, 3.84089719, 3.84130994),
    (10, -4.04379959, -4.04366610, 3.04379959, 3.04421042),
    (11, -3.43754139, -3.43740635, 2.43754139, 2.43795067),
    (12, -2.96591238, -2.96577614, 1.96591238, 1.96632046),
    (13, -2.59193806, -2.59180118, 1.59193806, 1.59234550),
    (14, -2.29036510, -2.29022859, 1.29036510, 1.29077291),
    (15, -2.04344083, -2.04330568, 1.04344083, 1.04385000),
    (16, -1.83852684, -1.83839303, 0.83852684, 0.83893735),
    (17, -1.66669349, -1.66655892, 0.66669349, 0.66710324),
    (18, -1.52176867, -1.52162862, 0.52176867, 0.52217294),
    (19, -1.39957504, -1.39942243, 0.39957504, 0.39996675),
    (20, -1.29727458, -1.29710087, 0.29727458, 0.29764520),
    (21, -1.21281710, -1.21261340, 0.21281710, 0.21315772),
    (22, -1.14452007, -1.14427809, 0.14452007, 0.14482241),
    (23, -1.09085090, -1.09056341, 0.09085090, 0.09110773),
    (24, -1.05046575, -1.05012623, 0.05046575, 0.05067055),
    (25, -1.02234924, -1.02195075, 0.02234924, 0.02249507),
    (26, -1.00579048, -1.00532349, 0.00579048, 0.00586781),
    (27, -1.00056446, -1.00002650, 0.00056446, 0.00057082),
    (28, -1.00001426, -0.99947180, 0.00001426, 0.00001612),
    (29, -0.99999527, -0.99945098, -0.00000473, -0.00000470),
];

/// Threshold quantum numbers `(ν, ν_th BO, ν_th scaled)`.
pub const THRESHOLD_NUMBERS: [(u32, f64, f64); 10] = [
    (20, 28.75, 28.76),
    (21, 28.92, 28.93),
    (22, 29.07, 29.08),
    (23, 29.20, 29.21),
    (24, 29.30, 29.31),
    (25, 29.34, 29.35),
    (26, 29.29, 29.29),
    (27, 29.07, 29.08),
    (28, 28.94, 28.94),
    (29, 29.34, 29.35),
];

/// `(R, δE_lep, E_ad, Δ)` in millihartree.
pub const LEPTONIC_SHIFT: [(f64, f64, f64, f64); 50] = [
    (0.744, 0.1441275, 5934.3, -5934.2),
    (0.746, 0.1445682, 6513.1, -6513.0),
    (0.748, 0.1450162, 2067.8, -2067.7),
    (0.75, 0.1454715, 1469.23, -1469.08),
    (0.8, 0.1591394, 40.385, -40.226),
    (0.85, 0.1767098, 11.8294, -11.6527),
    (0.9, 0.1972185, 5.656181, -5.458963),
    (0.95, 0.2195822, 3.36107, -3.14149),
    (1.0, 0.2427954, 2.27030, -2.02750),
    (1.1, 0.2887498, 1.310081, -1.021331),
    (1.2, 0.3311600, 0.9238342, -0.5926742),
    (1.3, 0.3685480, 0.7397641, -0.3712161),
    (1.4, 0.4005566, 0.6437032, -0.2431466),
    (1.5, 0.4273892, 0.5908774, -0.1634882),
    (1.6, 0.4496878, 0.5611774, -0.1114896),
    (1.7, 0.4683043, 0.5444602, -0.0761559),
    (1.8, 0.4839570, 0.5352240, -0.0512670),
    (1.9, 0.4970463, 0.5304100, -0.0333637),
    (2.0, 0.5077419, 0.5282176, -0.0204757),
    (2.1, 0.5162030, 0.5275680, -0.0113650),
    (2.2, 0.5227266, 0.5278091, -0.0050825),
    (2.3, 0.5277358, 0.5285403, -0.0008045),
    (2.4, 0.5316630, 0.5295251, 0.0021379),
    (2.5, 0.5348346, 0.5306166, 0.0042180),
    (2.6, 0.5374283, 0.5317269, 0.0057014),
    (2.7, 0.5395071, 0.5328086, 0.0066985),
    (2.8, 0.5410885, 0.5338338, 0.0072547),
    (2.9, 0.5422054, 0.5347878, 0.0074176),
    (3.0, 0.5429322, 0.5356682, 0.0072640),
    (3.1, 0.5433773, 0.5364731, 0.0069042),
    (3.2, 0.5436549, 0.5372086, 0.0064463),
    (3.3, 0.5438564, 0.5378795, 0.0059769),
    (3.4, 0.5440330, 0.5384894, 0.0055436),
    (3.5, 0.5441933, 0.5390447, 0.0051486),
    (3.6, 0.5443153, 0.5395488, 0.0047665),
    (3.8, 0.5443107, 0.5404270, 0.0038837),
    (4.0, 0.5438799, 0.5411558, 0.0027241),
    (4.2, 0.5432116, 0.5417607, 0.0014509),
    (4.5, 0.5426022, 0.5424800, 0.0001222),
    (5.0, 0.5436598, 0.5433068, 0.0003530),
    (5.5, 0.5444552, 0.5438155, 0.0006397),
    (6.0, 0.5438428, 0.5441254, -0.0002826),
    (6.5, 0.5436756, 0.5443113, -0.0006357),
    (7.0, 0.5440693, 0.5444247, -0.0003554),
    (8.0, 0.5442068, 0.5445352, -0.0003284),
    (9.0, 0.5442654, 0.5445789, -0.0003135),
    (10.0, 0.5442959, 0.5445979, -0.0003020),
    (12.0, 0.5443144, 0.5446109, -0.0002965),
    (15.0, 0.5443191, 0.5446156, -0.0002965),
    (20.0, 0.5443203, 0.5446168, -0.0002965),
];

/// Quoted van der Waals length scales (bohr).
pub const BETA6_BO: f64 = 10.4521;
pub const BETA6_SCALED: f64 = 10.4592;

/// Tangent-line scattering length and its quoted uncertainty (bohr).
pub const TANGENT_SCATTERING_LENGTH: (f64, f64) = (7.6, 0.4);

/// Scattering length from direct numerical integration (bohr).
pub const INTEGRATED_SCATTERING_LENGTH: f64 = 7.7;

/// WKB scattering lengths `(BO, scaled)` in bohr.
pub const WKB_SCATTERING_LENGTHS: (f64, f64) = (7.6, 7.5);

/// Bound-state counts for l = 0 and l = 1.
pub const BOUND_COUNTS: (usize, usize) = (29, 28);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_wave_columns_are_consistent() {
        let mu = 1836.15267247 / 1837.15267247;
        for &(nu, e, es, pn, delta, eps, epss) in &LEVELS_L0 {
            assert!((-1.0 - e - eps).abs() < 2e-8, "row {nu}");
            assert!((pn - e - delta).abs() < 1e-3, "row {nu}");
            assert!((-mu - es - epss).abs() < 2e-8, "row {nu}");
        }
    }

    #[test]
    fn p_wave_columns_are_consistent() {
        for &(nu, e, _, eps, _) in &LEVELS_L1 {
            assert!((-1.0 - e - eps).abs() < 2e-8, "row {nu}");
        }
    }

    #[test]
    fn shift_table_is_sorted() {
        assert!(LEPTONIC_SHIFT.windows(2).all(|w| w[0].0 < w[1].0));
    }
}
