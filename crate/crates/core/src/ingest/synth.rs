//! Seeded synthetic table sets with planted structure and a default cascade.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use chrono::{Duration, Months};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tables::*;
use super::IngestError;
use crate::graph::{Date, EnterpriseId};
use crate::patterns::Motif;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedMotifSpec {
    pub motif: Motif,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub community_count: usize,
    pub community_size_min: usize,
    pub community_size_max: usize,
    /// Probability of each ordered pair inside a community.
    pub intra_density: f64,
    /// Probability of each node pair across communities.
    pub inter_density: f64,
    pub mutual_pairs: usize,
    pub revolving_cycles: usize,
    pub revolving_len: usize,
    pub stars: usize,
    pub star_size: usize,
    pub joint_liability: usize,
    pub joint_size: usize,
    pub motifs: Vec<PlantedMotifSpec>,
    /// Fraction of enterprises that default spontaneously (at least one when positive).
    pub seed_fraction: f64,
    /// Chance that a borrower's default spreads to each of its guarantors.
    pub propagation_probability: f64,
    pub start: Date,
    pub end: Date,
    /// Fraction of community enterprises whose records begin after `start`.
    pub late_entry_fraction: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let feed_forward = Motif::new(3, &[(0, 1), (1, 2), (0, 2)]).expect("valid motif");
        // Single input, single output: 0 feeds 3 through two parallel branches.
        let diamond = Motif::new(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]).expect("valid motif");
        SyntheticConfig {
            seed: 1,
            community_count: 12,
            community_size_min: 8,
            community_size_max: 24,
            intra_density: 0.15,
            inter_density: 0.002,
            mutual_pairs: 3,
            revolving_cycles: 2,
            revolving_len: 4,
            stars: 2,
            star_size: 4,
            joint_liability: 2,
            joint_size: 3,
            motifs: vec![
                PlantedMotifSpec { motif: feed_forward, count: 3 },
                PlantedMotifSpec { motif: diamond, count: 2 },
            ],
            seed_fraction: 0.04,
            propagation_probability: 0.3,
            start: Date::from_ymd_opt(2013, 1, 1).unwrap(),
            end: Date::from_ymd_opt(2016, 12, 31).unwrap(),
            late_entry_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedStar {
    pub guarantor: EnterpriseId,
    pub borrowers: Vec<EnterpriseId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedJoint {
    pub borrower: EnterpriseId,
    pub guarantors: Vec<EnterpriseId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedMotif {
    pub motif: Motif,
    /// Enterprise in each motif slot.
    pub nodes: Vec<EnterpriseId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeEvent {
    pub enterprise: EnterpriseId,
    pub date: Date,
    /// The borrower whose default spread here; `None` for a seed.
    pub source: Option<EnterpriseId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerCounts {
    pub enterprises: usize,
    pub topology_edges: usize,
    pub guarantees: usize,
    pub contracts: usize,
    pub repayments: usize,
    pub defaults: usize,
}

/// What the generator planted, for checking detectors against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub communities: Vec<Vec<EnterpriseId>>,
    pub mutual_pairs: Vec<(EnterpriseId, EnterpriseId)>,
    /// Each cycle in edge direction, guarantor first.
    pub revolving: Vec<Vec<EnterpriseId>>,
    pub stars: Vec<PlantedStar>,
    pub joint_liability: Vec<PlantedJoint>,
    pub motifs: Vec<PlantedMotif>,
    /// Guarantor → borrower pairs before expansion into contracts.
    pub topology_edges: Vec<(EnterpriseId, EnterpriseId)>,
    /// Defaults in date order.
    pub cascade: Vec<CascadeEvent>,
    pub counts: LedgerCounts,
    /// A date on which every topology edge is active.
    pub full_span_date: Date,
}

impl GroundTruth {
    pub fn defaulted(&self) -> BTreeSet<EnterpriseId> {
        self.cascade.iter().map(|e| e.enterprise.clone()).collect()
    }
}

const SECTORS: [&str; 8] =
    ["manufacturing", "wholesale", "retail", "construction", "textiles", "chemicals", "logistics", "agriculture"];
const NATURES: [&str; 4] = ["private", "state", "collective", "foreign"];
const SCALES: [&str; 4] = ["micro", "small", "medium", "large"];

fn money(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn add_months(d: Date, m: u32) -> Date {
    d.checked_add_months(Months::new(m)).expect("date in range")
}

fn check(cfg: &SyntheticConfig) -> Result<(), IngestError> {
    let bad = |msg: &str| Err(IngestError::InfeasibleConfig(msg.into()));
    for (name, p) in [
        ("intra_density", cfg.intra_density),
        ("inter_density", cfg.inter_density),
        ("seed_fraction", cfg.seed_fraction),
        ("propagation_probability", cfg.propagation_probability),
        ("late_entry_fraction", cfg.late_entry_fraction),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(IngestError::InfeasibleConfig(format!("{name} must lie in [0, 1]")));
        }
    }
    if cfg.community_count == 0 || cfg.community_size_min < 2 || cfg.community_size_min > cfg.community_size_max {
        return bad("need at least one community and 2 <= community_size_min <= community_size_max");
    }
    if cfg.revolving_cycles > 0 && !(3..=8).contains(&cfg.revolving_len) {
        return bad("revolving_len must be between 3 and 8");
    }
    if cfg.stars > 0 && cfg.star_size < 3 {
        return bad("star_size must be at least 3");
    }
    if cfg.joint_liability > 0 && cfg.joint_size < 2 {
        return bad("joint_size must be at least 2");
    }
    if let Some(m) = cfg.motifs.iter().find(|m| m.motif.k() > cfg.community_size_max) {
        return Err(IngestError::InfeasibleConfig(format!(
            "planted motif with {} nodes exceeds the largest community ({})",
            m.motif.k(),
            cfg.community_size_max
        )));
    }
    if add_months(cfg.start, 24) > cfg.end {
        return bad("date span must cover at least 24 months");
    }
    Ok(())
}

struct Firm {
    entry: Date,
    capital: f64,
    sector: &'static str,
    nature: &'static str,
    scale: &'static str,
    employees: u32,
    rating: u8,
    deposit: f64,
}

struct Contract {
    id: String,
    firm: usize,
    amount: f64,
    start: Date,
    dues: Vec<Date>,
}

/// Builds a table set and the ledger of what was planted. The same config
/// always yields identical tables.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<(TableSet, GroundTruth), IngestError> {
    check(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();

    // Communities.
    let mut communities: Vec<Vec<usize>> = Vec::new();
    let mut n = 0usize;
    for _ in 0..cfg.community_count {
        let size = rng.gen_range(cfg.community_size_min..=cfg.community_size_max);
        communities.push((n..n + size).collect());
        n += size;
    }
    for comm in &communities {
        for i in 1..comm.len() {
            let j = rng.gen_range(0..i);
            let (u, v) = (comm[i], comm[j]);
            edges.insert(if rng.gen_bool(0.5) { (u, v) } else { (v, u) });
        }
        for &u in comm {
            for &v in comm {
                if u != v && rng.gen_bool(cfg.intra_density) {
                    edges.insert((u, v));
                }
            }
        }
    }
    let community_nodes = n;
    let mut home = vec![0usize; n];
    for (c, comm) in communities.iter().enumerate() {
        for &u in comm {
            home[u] = c;
        }
    }
    if cfg.inter_density > 0.0 {
        for u in 0..n {
            for v in u + 1..n {
                if home[u] != home[v] && rng.gen_bool(cfg.inter_density) {
                    edges.insert(if rng.gen_bool(0.5) { (u, v) } else { (v, u) });
                }
            }
        }
    }

    // Planted structures sit on fresh nodes, each fed by one guarantee from
    // a community node so no extra cycle passes through them.
    let fresh = |count: usize, n: &mut usize| -> Vec<usize> {
        let out: Vec<usize> = (*n..*n + count).collect();
        *n += count;
        out
    };
    let attach = |entry: usize, edges: &mut BTreeSet<(usize, usize)>, rng: &mut ChaCha8Rng| {
        edges.insert((rng.gen_range(0..community_nodes), entry));
    };
    let mut mutual = Vec::new();
    for _ in 0..cfg.mutual_pairs {
        let s = fresh(2, &mut n);
        edges.insert((s[0], s[1]));
        edges.insert((s[1], s[0]));
        attach(s[0], &mut edges, &mut rng);
        mutual.push((s[0], s[1]));
    }
    let mut revolving = Vec::new();
    for _ in 0..cfg.revolving_cycles {
        let s = fresh(cfg.revolving_len, &mut n);
        for i in 0..s.len() {
            edges.insert((s[i], s[(i + 1) % s.len()]));
        }
        attach(s[0], &mut edges, &mut rng);
        revolving.push(s);
    }
    let mut stars = Vec::new();
    for _ in 0..cfg.stars {
        let s = fresh(cfg.star_size + 1, &mut n);
        for &b in &s[1..] {
            edges.insert((s[0], b));
        }
        attach(s[0], &mut edges, &mut rng);
        stars.push(s);
    }
    let mut joints = Vec::new();
    for _ in 0..cfg.joint_liability {
        let s = fresh(cfg.joint_size + 1, &mut n);
        for &g in &s[1..] {
            edges.insert((g, s[0]));
        }
        attach(s[1], &mut edges, &mut rng);
        joints.push(s);
    }
    let mut motifs = Vec::new();
    for spec in &cfg.motifs {
        for _ in 0..spec.count {
            let s = fresh(spec.motif.k(), &mut n);
            for (a, b) in spec.motif.edges() {
                edges.insert((s[a], s[b]));
            }
            attach(s[0], &mut edges, &mut rng);
            motifs.push((spec.motif, s));
        }
    }

    let ids: Vec<EnterpriseId> = (0..n).map(|i| EnterpriseId::new(format!("E{:05}", i + 1))).collect();
    let mut guarantors_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut guarantees_out = vec![0usize; n];
    for &(g, b) in &edges {
        guarantors_of[b].push(g);
        guarantees_out[g] += 1;
    }

    // Firm attributes; communities lean towards one sector.
    let community_sector: Vec<&str> = (0..cfg.community_count).map(|_| *SECTORS.choose(&mut rng).unwrap()).collect();
    let firms: Vec<Firm> = (0..n)
        .map(|u| {
            let late = u < community_nodes && rng.gen_bool(cfg.late_entry_fraction);
            let entry = if late { add_months(cfg.start, rng.gen_range(6..=18)) } else { cfg.start };
            let sector = if u < community_nodes && rng.gen_bool(0.7) {
                community_sector[home[u]]
            } else {
                *SECTORS.choose(&mut rng).unwrap()
            };
            let capital = (10f64.powf(rng.gen_range(6.0..8.0)) / 1000.0).round() * 1000.0;
            Firm {
                entry,
                capital,
                sector,
                nature: NATURES.choose(&mut rng).unwrap(),
                scale: SCALES.choose(&mut rng).unwrap(),
                employees: rng.gen_range(5..=2000),
                rating: rng.gen_range(2..=5),
                deposit: capital * rng.gen_range(0.05..0.3),
            }
        })
        .collect();

    // Back-to-back monthly-amortising contracts from entry to the end of the span.
    let mut contracts: Vec<Contract> = Vec::new();
    let mut contracts_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, f) in firms.iter().enumerate() {
        let mut start = f.entry;
        while add_months(start, 3) <= cfg.end {
            let mut len = if rng.gen_bool(0.5) { 12 } else { 24 };
            while add_months(start, len) > cfg.end {
                len -= 1;
            }
            let dues: Vec<Date> = (1..=len).map(|m| add_months(start, m)).collect();
            let amount = (f.capital * rng.gen_range(0.2..1.5) / 1000.0).round() * 1000.0;
            contracts_of[u].push(contracts.len());
            contracts.push(Contract { id: format!("L{:07}", contracts.len() + 1), firm: u, amount, start, dues });
            start = add_months(start, len) + Duration::days(1);
        }
    }
    let maturity = |c: &Contract| *c.dues.last().unwrap();
    let full_span_date = (0..n).map(|u| maturity(&contracts[*contracts_of[u].last().unwrap()])).min().unwrap();

    // Default cascade: seeds weighted by how many guarantors they have,
    // spreading from each defaulting borrower to its guarantors.
    let latest_default = cfg.end - Duration::days(90);
    let earliest_seed = cfg.start + Duration::days((cfg.end - cfg.start).num_days() / 4);
    let n_seeds = if cfg.seed_fraction > 0.0 { ((cfg.seed_fraction * n as f64).round() as usize).max(1) } else { 0 };
    let weighted: Vec<usize> = (0..n).collect();
    let mut seeds: Vec<usize> = weighted
        .choose_multiple_weighted(&mut rng, n_seeds.min(n), |&u| (guarantors_of[u].len() + 1) as f64)
        .expect("positive weights")
        .copied()
        .collect();
    seeds.sort_unstable();
    let mut queue: BinaryHeap<Reverse<(Date, usize, Option<usize>)>> = BinaryHeap::new();
    for &s in &seeds {
        let lo = earliest_seed.max(firms[s].entry + Duration::days(31));
        let day = rng.gen_range(0..=(latest_default - lo).num_days().max(0));
        queue.push(Reverse((lo + Duration::days(day), s, None)));
    }
    let mut default_date: Vec<Option<Date>> = vec![None; n];
    let mut cascade = Vec::new();
    while let Some(Reverse((date, u, source))) = queue.pop() {
        if default_date[u].is_some() {
            continue;
        }
        default_date[u] = Some(date);
        cascade.push(CascadeEvent { enterprise: ids[u].clone(), date, source: source.map(|s| ids[s].clone()) });
        for &g in &guarantors_of[u] {
            if default_date[g].is_none() && rng.gen_bool(cfg.propagation_probability) {
                let d = (date + Duration::days(rng.gen_range(30..=120)))
                    .max(firms[g].entry + Duration::days(31))
                    .min(latest_default);
                queue.push(Reverse((d, g, Some(u))));
            }
        }
    }

    let mut t = TableSet::default();
    for (u, f) in firms.iter().enumerate() {
        let cid = ids[u].to_string();
        t.customer_profile.push(CustomerProfileRow {
            customer_id: cid.clone(),
            as_of: f.entry - Duration::days(30),
            business_nature: f.nature.into(),
            registered_capital: f.capital,
            enterprise_scale: f.scale.into(),
            employee_count: f.employees,
            sector: f.sector.into(),
        });
        if guarantees_out[u] > 0 {
            let kind = if rng.gen_bool(0.85) { "enterprise" } else { "guarantee_company" };
            t.guarantee_profile.push(GuaranteeProfileRow { customer_id: cid.clone(), guarantor_type: kind.into(), as_of: f.entry });
        }
        // Distressed firms show falling deposits and worsening ratings ahead of default.
        let mut month = f.entry;
        let mut deposit = f.deposit;
        let mut rating = f.rating;
        let mut q = 0;
        while month <= cfg.end {
            let distressed = default_date[u].is_some_and(|d| month + Duration::days(180) >= d);
            deposit *= if distressed { rng.gen_range(0.80..0.92) } else { rng.gen_range(0.96..1.05) };
            t.loan_account.push(LoanAccountRow { customer_id: cid.clone(), as_of: month, deposit_balance: money(deposit) });
            if q % 3 == 0 {
                if default_date[u].is_some_and(|d| month + Duration::days(270) >= d) {
                    rating = (rating + 1).min(10);
                }
                t.customer_credit.push(CustomerCreditRow { customer_id: cid.clone(), as_of: month, credit_rating: rating });
            }
            q += 1;
            month = add_months(month, 1);
        }
    }

    for c in &contracts {
        let f = &firms[c.firm];
        t.loan_contract.push(LoanContractRow {
            contract_id: c.id.clone(),
            customer_id: ids[c.firm].to_string(),
            loan_amount: c.amount,
            start_date: c.start,
            capital_return: "monthly".into(),
            interest_return: if f.scale == "large" { "quarterly".into() } else { "monthly".into() },
        });
        let due_amount = money(c.amount / c.dues.len() as f64);
        let mut first_missed = true;
        for &due in &c.dues {
            let distressed = default_date[c.firm].is_some_and(|d| due >= d);
            let missed = distressed && (first_missed || rng.gen_bool(0.7));
            let (paid_date, paid_amount) = if missed {
                first_missed = false;
                let late = due + Duration::days(rng.gen_range(35..=120));
                if rng.gen_bool(0.5) && late <= cfg.end { (Some(late), due_amount) } else { (None, 0.0) }
            } else {
                (Some(due - Duration::days(rng.gen_range(0..=5))), due_amount)
            };
            t.repayment_status.push(RepaymentStatusRow {
                contract_id: c.id.clone(),
                due_date: due,
                due_amount,
                paid_date,
                paid_amount,
            });
            t.default_status.push(DefaultStatusRow {
                contract_id: c.id.clone(),
                due_date: due,
                default_flag: paid_date.is_none_or(|p| p > due),
            });
        }
    }

    for &(g, b) in &edges {
        for &ci in &contracts_of[b] {
            let c = &contracts[ci];
            let from = c.start.max(firms[g].entry);
            if from > maturity(c) {
                continue;
            }
            let gid = format!("G{:07}", t.guarantee_contract.len() + 1);
            t.guarantee_relationship.push(GuaranteeRelationshipRow {
                guarantee_id: gid.clone(),
                guarantor_id: ids[g].to_string(),
                borrower_id: ids[b].to_string(),
                contract_id: c.id.clone(),
            });
            t.guarantee_contract.push(GuaranteeContractRow {
                guarantee_id: gid,
                amount: (c.amount * rng.gen_range(0.3..1.0) / 1000.0).round() * 1000.0,
                valid_from: from,
                valid_to: Some(maturity(c)),
            });
        }
    }

    let counts = LedgerCounts {
        enterprises: n,
        topology_edges: edges.len(),
        guarantees: t.guarantee_relationship.len(),
        contracts: t.loan_contract.len(),
        repayments: t.repayment_status.len(),
        defaults: t.default_status.iter().filter(|r| r.default_flag).count(),
    };
    let name = |v: &[usize]| -> Vec<EnterpriseId> { v.iter().map(|&u| ids[u].clone()).collect() };
    let truth = GroundTruth {
        seed: cfg.seed,
        communities: communities.iter().map(|c| name(c)).collect(),
        mutual_pairs: mutual.iter().map(|&(a, b)| (ids[a].clone(), ids[b].clone())).collect(),
        revolving: revolving.iter().map(|c| name(c)).collect(),
        stars: stars.iter().map(|s| PlantedStar { guarantor: ids[s[0]].clone(), borrowers: name(&s[1..]) }).collect(),
        joint_liability: joints
            .iter()
            .map(|s| PlantedJoint { borrower: ids[s[0]].clone(), guarantors: name(&s[1..]) })
            .collect(),
        motifs: motifs.into_iter().map(|(motif, s)| PlantedMotif { motif, nodes: name(&s) }).collect(),
        topology_edges: edges.iter().map(|&(g, b)| (ids[g].clone(), ids[b].clone())).collect(),
        cascade,
        counts,
        full_span_date,
    };
    Ok((t, truth))
}
