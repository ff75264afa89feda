//! The sub-type catalog and the skeleton text of every template shape.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::sparql::{parse_template, Comparator, Extremum, Slot, SparqlQuery};
use crate::text::{dice, trigrams};

/// The ten coarse question types, named as in the result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QuestionType {
    Clarification,
    LogicalReasoning,
    QuantitativeReasoning,
    ComparativeReasoning,
    SimpleCoreferenced,
    SimpleDirect,
    SimpleEllipsis,
    Verification,
    QuantitativeCount,
    ComparativeCount,
}

/// How a question type is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    F1,
    Accuracy,
}

impl QuestionType {
    pub const ALL: [QuestionType; 10] = [
        QuestionType::Clarification,
        QuestionType::LogicalReasoning,
        QuestionType::QuantitativeReasoning,
        QuestionType::ComparativeReasoning,
        QuestionType::SimpleCoreferenced,
        QuestionType::SimpleDirect,
        QuestionType::SimpleEllipsis,
        QuestionType::Verification,
        QuestionType::QuantitativeCount,
        QuestionType::ComparativeCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QuestionType::Clarification => "Clarification",
            QuestionType::LogicalReasoning => "Logical Reasoning (All)",
            QuestionType::QuantitativeReasoning => "Quantitative Reasoning (All)",
            QuestionType::ComparativeReasoning => "Comparative Reasoning (All)",
            QuestionType::SimpleCoreferenced => "Simple Question (Coreferenced)",
            QuestionType::SimpleDirect => "Simple Question (Direct)",
            QuestionType::SimpleEllipsis => "Simple Question (Ellipsis)",
            QuestionType::Verification => "Verification (Boolean)",
            QuestionType::QuantitativeCount => "Quantitative Reasoning (Count)",
            QuestionType::ComparativeCount => "Comparative Reasoning (Count)",
        }
    }

    pub fn metric(self) -> Metric {
        match self {
            QuestionType::Verification | QuestionType::QuantitativeCount | QuestionType::ComparativeCount => {
                Metric::Accuracy
            }
            _ => Metric::F1,
        }
    }

    /// Accepts the table names and the shorter dataset spellings.
    pub fn from_name(name: &str) -> Option<Self> {
        let key = lookup_key(name);
        QuestionType::ALL.into_iter().find(|t| {
            let full = lookup_key(t.name());
            full == key || full.strip_suffix("(all)") == Some(key.as_str()) || short_key(*t) == key
        })
    }
}

fn short_key(t: QuestionType) -> String {
    lookup_key(match t {
        QuestionType::Clarification => "Clarification",
        QuestionType::LogicalReasoning => "Logical Reasoning",
        QuestionType::QuantitativeReasoning => "Quantitative Reasoning",
        QuestionType::ComparativeReasoning => "Comparative Reasoning",
        QuestionType::SimpleCoreferenced => "Simple Question (Coreference)",
        QuestionType::SimpleDirect => "Simple Question",
        QuestionType::SimpleEllipsis => "Simple Question (Ellipsis)",
        QuestionType::Verification => "Verification",
        QuestionType::QuantitativeCount => "Quantitative Reasoning Count",
        QuestionType::ComparativeCount => "Comparative Reasoning Count",
    })
}

impl fmt::Display for QuestionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sub-type groups used for the phenomenon rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phenomenon {
    Coreference,
    Ellipsis,
    MultipleEntities,
}

/// Which side of the relation the annotated entity sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `ENTITY1 RELATION1 ?x`
    #[default]
    Forward,
    /// `?x RELATION1 ENTITY1`
    Reverse,
}

/// The operator of an aggregate sub-type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operator {
    Compare(Comparator),
    Extremum(Extremum),
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Compare(c) => f.write_str(c.symbol()),
            Operator::Extremum(Extremum::Max) => f.write_str("max"),
            Operator::Extremum(Extremum::Min) => f.write_str("min"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown operator `{0}`: expected max, min, >, <, >=, <=, = or ~")]
pub struct OperatorError(pub String);

impl FromStr for Operator {
    type Err = OperatorError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "max" => Ok(Operator::Extremum(Extremum::Max)),
            "min" => Ok(Operator::Extremum(Extremum::Min)),
            other => Comparator::from_symbol(other)
                .map(Operator::Compare)
                .ok_or_else(|| OperatorError(s.to_string())),
        }
    }
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Set operator of the logical sub-types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SetOp {
    Union,
    Intersection,
    Difference,
}

/// Query shape shared by a family of sub-types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// One entity, one relation, one type.
    Simple,
    /// Two entities sharing a relation and a type, united.
    SimpleTwoEntities,
    /// Two entities combined by a set operator; `multi_relation` gives the
    /// second entity its own relation.
    Logical { op: SetOp, multi_relation: bool },
    /// `ASK` over one triple.
    VerifyTwo,
    /// `ASK` over two triples sharing the first entity.
    VerifyThree,
    /// `COUNT(*)` over the simple shape.
    CountSimple,
    /// `COUNT(DISTINCT ?x)` over the two-entity union.
    CountTwoEntities,
    /// `COUNT(DISTINCT ?x)` over one entity and relation, united over two types.
    CountLogical,
    /// Argmax/argmin of per-key neighbour counts.
    Extremum { multi_type: bool },
    /// Per-key neighbour counts compared with a number.
    Threshold { multi_type: bool, count: bool },
    /// Per-key neighbour counts compared with those of a named entity.
    Comparative { multi_type: bool, count: bool },
}

impl Shape {
    /// Operator used when an annotation names none.
    pub fn default_operator(self) -> Option<Operator> {
        match self {
            Shape::Extremum { .. } => Some(Operator::Extremum(Extremum::Max)),
            Shape::Threshold { .. } => Some(Operator::Compare(Comparator::Ge)),
            Shape::Comparative { .. } => Some(Operator::Compare(Comparator::Gt)),
            _ => None,
        }
    }

    pub fn accepts(self, op: Operator) -> bool {
        match (self, op) {
            (Shape::Extremum { .. }, Operator::Extremum(_)) => true,
            (Shape::Threshold { .. }, Operator::Compare(_)) => true,
            (Shape::Comparative { .. }, Operator::Compare(c)) => matches!(c, Comparator::Gt | Comparator::Lt),
            _ => false,
        }
    }

    /// Skeleton text for one variant.
    pub fn skeleton_text(self, dir: Direction, op: Option<Operator>) -> String {
        let link = |node: &str, rel: &str, other: &str| match dir {
            Direction::Forward => format!("{node} {rel} {other} ."),
            Direction::Reverse => format!("{other} {rel} {node} ."),
        };
        let typed = |node: &str, rel: &str, ty: &str| format!("{} ?x wdt:P31 {ty} .", link(node, rel, "?x"));
        let count_distinct = "SELECT (COUNT(DISTINCT ?x) AS ?count) WHERE";
        match self {
            Shape::Simple => format!("SELECT ?x WHERE {{ {} }}", typed("ENTITY1", "RELATION1", "TYPE1")),
            Shape::SimpleTwoEntities => format!(
                "SELECT ?x WHERE {{ {{ {} }} UNION {{ {} }} }}",
                typed("ENTITY1", "RELATION1", "TYPE1"),
                typed("ENTITY2", "RELATION1", "TYPE1")
            ),
            Shape::Logical { op, multi_relation } => {
                let r2 = if multi_relation { "RELATION2" } else { "RELATION1" };
                match op {
                    SetOp::Union => format!(
                        "SELECT ?x WHERE {{ {{ {} }} UNION {{ {} }} }}",
                        typed("ENTITY1", "RELATION1", "TYPE1"),
                        typed("ENTITY2", r2, "TYPE1")
                    ),
                    SetOp::Intersection => format!(
                        "SELECT ?x WHERE {{ {} {} ?x wdt:P31 TYPE1 . }}",
                        link("ENTITY1", "RELATION1", "?x"),
                        link("ENTITY2", r2, "?x")
                    ),
                    SetOp::Difference => format!(
                        "SELECT ?x WHERE {{ {} MINUS {{ {} }} }}",
                        typed("ENTITY1", "RELATION1", "TYPE1"),
                        link("ENTITY2", r2, "?x")
                    ),
                }
            }
            Shape::VerifyTwo => format!("ASK {{ {} }}", link("ENTITY1", "RELATION1", "ENTITY2")),
            Shape::VerifyThree => format!(
                "ASK {{ {} {} }}",
                link("ENTITY1", "RELATION1", "ENTITY2"),
                link("ENTITY1", "RELATION1", "ENTITY3")
            ),
            Shape::CountSimple => format!(
                "SELECT (COUNT(*) AS ?count) WHERE {{ {} }}",
                typed("ENTITY1", "RELATION1", "TYPE1")
            ),
            Shape::CountTwoEntities => format!(
                "{count_distinct} {{ {{ {} }} UNION {{ {} }} }}",
                typed("ENTITY1", "RELATION1", "TYPE1"),
                typed("ENTITY2", "RELATION1", "TYPE1")
            ),
            Shape::CountLogical => format!(
                "{count_distinct} {{ {{ {} }} UNION {{ {} }} }}",
                typed("ENTITY1", "RELATION1", "TYPE1"),
                typed("ENTITY1", "RELATION1", "TYPE2")
            ),
            Shape::Extremum { multi_type } | Shape::Threshold { multi_type, .. } | Shape::Comparative { multi_type, .. } => {
                let member = |ty: &str| format!("{} ?x wdt:P31 TYPE1 . ?y wdt:P31 {ty} .", link("?x", "RELATION1", "?y"));
                let body = if multi_type {
                    format!("{{ {} }} UNION {{ {} }}", member("TYPE2"), member("TYPE3"))
                } else {
                    member("TYPE2")
                };
                let counted = matches!(
                    self,
                    Shape::Threshold { count: true, .. } | Shape::Comparative { count: true, .. }
                );
                let head = if counted { count_distinct } else { "SELECT ?x WHERE" };
                let op = op.or(self.default_operator());
                let tail = match (self, op) {
                    (Shape::Extremum { .. }, Some(Operator::Extremum(ext))) => {
                        let dir = if ext == Extremum::Max { "DESC" } else { "ASC" };
                        format!("ORDER BY {dir}(COUNT(DISTINCT ?y)) LIMIT 1")
                    }
                    (Shape::Threshold { .. }, Some(Operator::Compare(c))) => {
                        format!("HAVING (COUNT(DISTINCT ?y) {} VALUE1)", c.symbol())
                    }
                    (Shape::Comparative { .. }, Some(Operator::Compare(c))) => {
                        let reference = |ty: &str| {
                            let l = match dir {
                                Direction::Forward => "ENTITY1 RELATION1 ?z .".to_string(),
                                Direction::Reverse => "?z RELATION1 ENTITY1 .".to_string(),
                            };
                            format!("{l} ?z wdt:P31 {ty} .")
                        };
                        let sub = if multi_type {
                            format!("{{ {} }} UNION {{ {} }}", reference("TYPE2"), reference("TYPE3"))
                        } else {
                            reference("TYPE2")
                        };
                        format!(
                            "HAVING (COUNT(DISTINCT ?y) {} (SELECT (COUNT(DISTINCT ?z) AS ?count) WHERE {{ {sub} }}))",
                            c.symbol()
                        )
                    }
                    _ => unreachable!("operator checked against the shape by the caller"),
                };
                format!("{head} {{ {body} }} GROUP BY ?x {tail}")
            }
        }
    }
}

/// One catalog row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubType {
    pub name: &'static str,
    pub question_type: QuestionType,
    pub shape: Shape,
    pub phenomena: &'static [Phenomenon],
    /// Other spellings found in annotations.
    pub aliases: &'static [&'static str],
    /// False for entries whose name or skeleton is our convention rather
    /// than a printed example.
    pub attested: bool,
}

/// A skeleton plus its slot signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub sub_type: &'static str,
    pub direction: Direction,
    pub operator: Option<Operator>,
    pub skeleton: SparqlQuery,
    /// Distinct slots ordered by kind, then ordinal.
    pub signature: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown sub-type `{name}`; nearest: {}", nearest.join("; "))]
    Miss { name: String, nearest: Vec<String> },
    #[error("sub-type `{sub_type}` takes no operator `{operator}`")]
    Operator { sub_type: String, operator: Operator },
}

impl SubType {
    /// Build the variant for a direction and operator.
    pub fn template(&self, direction: Direction, operator: Option<Operator>) -> Result<Template, CatalogError> {
        let operator = match operator {
            Some(op) if self.shape.accepts(op) => Some(op),
            Some(op) => {
                return Err(CatalogError::Operator {
                    sub_type: self.name.to_string(),
                    operator: op,
                })
            }
            None => self.shape.default_operator(),
        };
        let text = self.shape.skeleton_text(direction, operator);
        let skeleton = parse_template(&text).unwrap_or_else(|e| panic!("catalog skeleton `{text}` does not parse: {e}"));
        let signature = skeleton.slots().into_iter().collect();
        Ok(Template {
            sub_type: self.name,
            direction,
            operator,
            skeleton,
            signature,
        })
    }

    pub fn default_template(&self) -> Template {
        self.template(Direction::Forward, None).expect("default operator fits its shape")
    }

    pub fn has(&self, p: Phenomenon) -> bool {
        self.phenomena.contains(&p)
    }
}

use Phenomenon::{Coreference as Co, Ellipsis as El, MultipleEntities as Me};
use QuestionType as Q;

const fn row(
    name: &'static str,
    question_type: QuestionType,
    shape: Shape,
    phenomena: &'static [Phenomenon],
    attested: bool,
) -> SubType {
    SubType {
        name,
        question_type,
        shape,
        phenomena,
        aliases: &[],
        attested,
    }
}

const fn aka(mut s: SubType, aliases: &'static [&'static str]) -> SubType {
    s.aliases = aliases;
    s
}

const fn logical(op: SetOp, multi_relation: bool) -> Shape {
    Shape::Logical { op, multi_relation }
}

const SIMPLE_ROWS: [SubType; 7] = [
    row("Single Entity", Q::SimpleDirect, Shape::Simple, &[], true),
    aka(
        row("Mult. Entity (Simple Question Direct and Coreference)", Q::SimpleDirect, Shape::SimpleTwoEntities, &[Me], true),
        &["Mult. Entity"],
    ),
    aka(
        row("Single Entity (Coreference)", Q::SimpleCoreferenced, Shape::Simple, &[Co], true),
        &["Single Entity|Indirect"],
    ),
    aka(
        row(
            "one entity, multiple entities (as object) corefered",
            Q::SimpleCoreferenced,
            Shape::SimpleTwoEntities,
            &[Co, Me],
            true,
        ),
        &["one entity, multiple entities (as object) coreferred", "Mult. Entity|Indirect"],
    ),
    row(
        "object parent is changed, subject and predicate remain same",
        Q::SimpleEllipsis,
        Shape::Simple,
        &[El],
        true,
    ),
    row("only subject is changed, parent and predicate remains same", Q::SimpleEllipsis, Shape::Simple, &[], false),
    row("Clarification", Q::Clarification, Shape::Simple, &[], false),
];

const LOGICAL_ROWS: [SubType; 9] = [
    row("Union | Single Relation", Q::LogicalReasoning, logical(SetOp::Union, false), &[], true),
    row("Intersection | Single Relation", Q::LogicalReasoning, logical(SetOp::Intersection, false), &[], false),
    row("Difference | Single Relation", Q::LogicalReasoning, logical(SetOp::Difference, false), &[], false),
    row("Union | Multiple Relation", Q::LogicalReasoning, logical(SetOp::Union, true), &[Me], true),
    row("Intersection | Multiple Relation", Q::LogicalReasoning, logical(SetOp::Intersection, true), &[Me], true),
    row("Difference | Multiple Relation", Q::LogicalReasoning, logical(SetOp::Difference, true), &[Me], true),
    row("Union | Single Relation (Ellipsis)", Q::LogicalReasoning, logical(SetOp::Union, false), &[El], true),
    row(
        "Intersection | Single Relation (Ellipsis)",
        Q::LogicalReasoning,
        logical(SetOp::Intersection, false),
        &[El],
        true,
    ),
    row(
        "Difference | Single Relation (Ellipsis)",
        Q::LogicalReasoning,
        logical(SetOp::Difference, false),
        &[El],
        true,
    ),
];

const VERIFICATION_ROWS: [SubType; 6] = [
    row("2 entities, both direct", Q::Verification, Shape::VerifyTwo, &[], true),
    aka(
        row(
            "2 entities, one direct and one indirect, subject is indirect",
            Q::Verification,
            Shape::VerifyTwo,
            &[Co],
            true,
        ),
        &["2 entities, subject is indirect"],
    ),
    aka(
        row(
            "2 entities, one direct and one indirect, object is indirect",
            Q::Verification,
            Shape::VerifyTwo,
            &[Co],
            true,
        ),
        &["2 entities, object is indirect"],
    ),
    row("3 entities, all direct, 2 are query entities", Q::Verification, Shape::VerifyThree, &[], true),
    row(
        "3 entities, 2 direct, 2(direct) are query entities, subject is indirect",
        Q::Verification,
        Shape::VerifyThree,
        &[],
        true,
    ),
    row(
        "3 entities, 2 direct, 2(direct) are query entities, subject is corefered",
        Q::Verification,
        Shape::VerifyThree,
        &[Co],
        true,
    ),
];

const QUANTITATIVE_ROWS: [SubType; 12] = [
    row("Min/Max | Single entity type", Q::QuantitativeReasoning, Shape::Extremum { multi_type: false }, &[], false),
    row("Min/Max | Mult. entity type", Q::QuantitativeReasoning, Shape::Extremum { multi_type: true }, &[Me], true),
    row(
        "Atleast/ Atmost/ Approx. the same/Equal | Single entity type",
        Q::QuantitativeReasoning,
        Shape::Threshold {
            multi_type: false,
            count: false,
        },
        &[],
        false,
    ),
    row(
        "Atleast/ Atmost/ Approx. the same/Equal | Mult. entity type",
        Q::QuantitativeReasoning,
        Shape::Threshold {
            multi_type: true,
            count: false,
        },
        &[Me],
        true,
    ),
    row("Count | Single entity type", Q::QuantitativeCount, Shape::CountSimple, &[], true),
    row("Count | Single entity type (Coreference)", Q::QuantitativeCount, Shape::CountSimple, &[Co], true),
    row("Count | Mult. entity type", Q::QuantitativeCount, Shape::CountTwoEntities, &[Me], true),
    row("Count | Logical operators", Q::QuantitativeCount, Shape::CountLogical, &[], true),
    row("Count | Logical operators (Coreference)", Q::QuantitativeCount, Shape::CountLogical, &[Co], true),
    row(
        "Count over Atleast/ Atmost/ Approx. the same/Equal | Single entity type",
        Q::QuantitativeCount,
        Shape::Threshold {
            multi_type: false,
            count: true,
        },
        &[],
        false,
    ),
    row(
        "Count over Atleast/ Atmost/ Approx. the same/Equal | Mult. entity type",
        Q::QuantitativeCount,
        Shape::Threshold {
            multi_type: true,
            count: true,
        },
        &[Me],
        true,
    ),
    row("Incomplete count-based ques", Q::QuantitativeCount, Shape::CountSimple, &[El], true),
];

const fn comparative(multi_type: bool, count: bool) -> Shape {
    Shape::Comparative { multi_type, count }
}

const COMPARATIVE_ROWS: [SubType; 12] = [
    row("More/Less | Single entity type", Q::ComparativeReasoning, comparative(false, false), &[], false),
    row("More/Less | Mult. entity type", Q::ComparativeReasoning, comparative(true, false), &[Me], true),
    row("More/Less | Single entity type (Coreference)", Q::ComparativeReasoning, comparative(false, false), &[Co], true),
    row("More/Less | Mult. entity type (Coreference)", Q::ComparativeReasoning, comparative(true, false), &[Co, Me], true),
    row("More/Less | Single entity type (Ellipsis)", Q::ComparativeReasoning, comparative(false, false), &[El], true),
    row("More/Less | Mult. entity type (Ellipsis)", Q::ComparativeReasoning, comparative(true, false), &[El, Me], true),
    row("Count over More/Less | Single entity type", Q::ComparativeCount, comparative(false, true), &[], false),
    row("Count over More/Less | Mult. entity type", Q::ComparativeCount, comparative(true, true), &[Me], true),
    row(
        "Count over More/Less | Single entity type (Coreference)",
        Q::ComparativeCount,
        comparative(false, true),
        &[Co],
        true,
    ),
    row(
        "Count over More/Less | Mult. entity type (Coreference)",
        Q::ComparativeCount,
        comparative(true, true),
        &[Co, Me],
        true,
    ),
    row(
        "Count over More/Less | Single entity type (Ellipsis)",
        Q::ComparativeCount,
        comparative(false, true),
        &[El],
        true,
    ),
    row(
        "Count over More/Less | Mult. entity type (Ellipsis)",
        Q::ComparativeCount,
        comparative(true, true),
        &[El, Me],
        true,
    ),
];

/// The full catalog in a fixed order.
pub fn catalog() -> &'static [SubType] {
    static CATALOG: OnceLock<Vec<SubType>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut all = Vec::new();
        all.extend(SIMPLE_ROWS);
        all.extend(LOGICAL_ROWS);
        all.extend(VERIFICATION_ROWS);
        all.extend(QUANTITATIVE_ROWS);
        all.extend(COMPARATIVE_ROWS);
        all
    })
}

/// Case-insensitive key with all whitespace removed.
pub(crate) fn lookup_key(name: &str) -> String {
    name.chars().filter(|c| !c.is_whitespace()).flat_map(char::to_lowercase).collect()
}

fn find_exact(key: &str) -> Option<&'static SubType> {
    catalog()
        .iter()
        .find(|s| lookup_key(s.name) == key || s.aliases.iter().any(|a| lookup_key(a) == key))
}

/// Look up a sub-type by name or alias. A `Type|Sub-type` string is tried
/// whole, then with leading `|` segments stripped one at a time.
pub fn template_for(name: &str) -> Result<&'static SubType, CatalogError> {
    let mut rest = name;
    loop {
        if let Some(found) = find_exact(&lookup_key(rest)) {
            return Ok(found);
        }
        match rest.split_once('|') {
            Some((_, tail)) => rest = tail,
            None => break,
        }
    }
    let grams = trigrams(&name.to_lowercase());
    let mut scored: Vec<(f64, &str)> = catalog()
        .iter()
        .map(|s| (dice(&grams, &trigrams(&s.name.to_lowercase())), s.name))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    Err(CatalogError::Miss {
        name: name.to_string(),
        nearest: scored.into_iter().take(3).map(|(_, n)| n.to_string()).collect(),
    })
}
