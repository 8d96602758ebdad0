//! ASJC subject taxonomy: 26 disciplines keyed by two-digit code prefix,
//! grouped into four fields.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Field {
    HealthSciences,
    LifeSciences,
    PhysicalSciences,
    SocialSciences,
}

impl Field {
    pub const ALL: [Field; 4] = [
        Field::HealthSciences,
        Field::LifeSciences,
        Field::PhysicalSciences,
        Field::SocialSciences,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Field::HealthSciences => "Health Sciences",
            Field::LifeSciences => "Life Sciences",
            Field::PhysicalSciences => "Physical Sciences",
            Field::SocialSciences => "Social Sciences",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discipline {
    pub prefix: u16,
    pub name: &'static str,
    pub field: Field,
}

use Field::*;

pub const DISCIPLINES: [Discipline; 26] = [
    Discipline {
        prefix: 11,
        name: "Agricultural and Biological Sciences",
        field: LifeSciences,
    },
    Discipline {
        prefix: 12,
        name: "Arts and Humanities",
        field: SocialSciences,
    },
    Discipline {
        prefix: 13,
        name: "Biochemistry, Genetics and Molecular Biology",
        field: LifeSciences,
    },
    Discipline {
        prefix: 14,
        name: "Business, Management and Accounting",
        field: SocialSciences,
    },
    Discipline {
        prefix: 15,
        name: "Chemical Engineering",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 16,
        name: "Chemistry",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 17,
        name: "Computer Science",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 18,
        name: "Decision Sciences",
        field: SocialSciences,
    },
    Discipline {
        prefix: 19,
        name: "Earth and Planetary Sciences",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 20,
        name: "Economics, Econometrics and Finance",
        field: SocialSciences,
    },
    Discipline {
        prefix: 21,
        name: "Energy",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 22,
        name: "Engineering",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 23,
        name: "Environmental Science",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 24,
        name: "Immunology and Microbiology",
        field: LifeSciences,
    },
    Discipline {
        prefix: 25,
        name: "Materials Science",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 26,
        name: "Mathematics",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 27,
        name: "Medicine",
        field: HealthSciences,
    },
    Discipline {
        prefix: 28,
        name: "Neuroscience",
        field: LifeSciences,
    },
    Discipline {
        prefix: 29,
        name: "Nursing",
        field: HealthSciences,
    },
    Discipline {
        prefix: 30,
        name: "Pharmacology, Toxicology and Pharmaceutics",
        field: LifeSciences,
    },
    Discipline {
        prefix: 31,
        name: "Physics and Astronomy",
        field: PhysicalSciences,
    },
    Discipline {
        prefix: 32,
        name: "Psychology",
        field: SocialSciences,
    },
    Discipline {
        prefix: 33,
        name: "Social Sciences",
        field: SocialSciences,
    },
    Discipline {
        prefix: 34,
        name: "Veterinary",
        field: HealthSciences,
    },
    Discipline {
        prefix: 35,
        name: "Dentistry",
        field: HealthSciences,
    },
    Discipline {
        prefix: 36,
        name: "Health Professions",
        field: HealthSciences,
    },
];

pub const MULTIDISCIPLINARY: &str = "Multidisciplinary";

/// Index into [`DISCIPLINES`] for a four-digit ASJC code. Codes outside the
/// table (including the general 10xx block) map to `None`.
pub fn discipline_index(code: u16) -> Option<usize> {
    let prefix = code / 100;
    if !(1000..=9999).contains(&code) || !(11..=36).contains(&prefix) {
        return None;
    }
    Some((prefix - 11) as usize)
}

pub fn discipline_by_name(name: &str) -> Option<usize> {
    DISCIPLINES.iter().position(|d| d.name == name)
}

/// A discipline or field assignment, with the fallback label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label<T> {
    Assigned(T),
    Multidisciplinary,
}

pub type DisciplineLabel = Label<usize>;
pub type FieldLabel = Label<Field>;

impl DisciplineLabel {
    pub fn name(&self) -> &'static str {
        match self {
            Label::Assigned(i) => DISCIPLINES[*i].name,
            Label::Multidisciplinary => MULTIDISCIPLINARY,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        if name == MULTIDISCIPLINARY {
            Some(Label::Multidisciplinary)
        } else {
            discipline_by_name(name).map(Label::Assigned)
        }
    }
}

impl FieldLabel {
    pub fn name(&self) -> &'static str {
        match self {
            Label::Assigned(f) => f.name(),
            Label::Multidisciplinary => MULTIDISCIPLINARY,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        if name == MULTIDISCIPLINARY {
            Some(Label::Multidisciplinary)
        } else {
            Field::ALL
                .into_iter()
                .find(|f| f.name() == name)
                .map(Label::Assigned)
        }
    }
}

impl fmt::Display for DisciplineLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
