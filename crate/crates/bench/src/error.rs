use std::fmt;

/// Broad failure class, printed as `error[<category>]:` with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Data,
    Io,
    Numerical,
    Internal,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Config => "config",
            Category::Data => "data",
            Category::Io => "io",
            Category::Numerical => "numerical",
            Category::Internal => "internal",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Category::Internal => 1,
            Category::Config => 2,
            Category::Data => 3,
            Category::Io => 4,
            Category::Numerical => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Self { category, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

fn core_category(e: &synchem::Error) -> Category {
    use synchem::Error as E;
    match e {
        E::Config(_) => Category::Config,
        E::Io(_) => Category::Io,
        E::Numerical(_) | E::BesselRoot { .. } => Category::Numerical,
        E::Dimension { .. }
        | E::IndexMismatch
        | E::UnknownColumn { .. }
        | E::Distribution(_)
        | E::WindowMismatch
        | E::Format(_) => Category::Data,
    }
}

/// Category of the first recognized error in the chain.
pub fn categorize(err: &anyhow::Error) -> Category {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return e.category;
        }
        if let Some(e) = cause.downcast_ref::<synchem::Error>() {
            return core_category(e);
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<csv::Error>().is_some() {
            return Category::Io;
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return Category::Io;
        }
    }
    Category::Internal
}
