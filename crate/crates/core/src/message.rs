use core::fmt;
use core::str::FromStr;

/// The four sidelink message classes.
///
/// Variants are declared in priority order, so the derived `Ord` makes
/// `Hpd < Denm < Cam < Mhd`: a *smaller* value means a *higher* priority.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageType {
    /// High-priority data.
    Hpd,
    /// Decentralized environmental notification.
    Denm,
    /// Cooperative awareness message (periodic).
    Cam,
    /// Multi-hop data.
    Mhd,
}

impl MessageType {
    /// All types, highest priority first.
    pub const ALL: [MessageType; 4] = [
        MessageType::Hpd,
        MessageType::Denm,
        MessageType::Cam,
        MessageType::Mhd,
    ];

    /// Position in [`MessageType::ALL`]; usable as an array index.
    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn outranks(self, other: MessageType) -> bool {
        self < other
    }

    pub const fn name(self) -> &'static str {
        match self {
            MessageType::Hpd => "HPD",
            MessageType::Denm => "DENM",
            MessageType::Cam => "CAM",
            MessageType::Mhd => "MHD",
        }
    }
}

impl fmt::Display for MessageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MessageType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MessageType::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}
