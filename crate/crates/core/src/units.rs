//! Display units. Values are always stored in Kelvin and watts; units only
//! affect what is shown.

use serde::{Deserialize, Serialize};

const CELSIUS_OFFSET: f64 = 273.15;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemperatureUnit {
    #[default]
    #[serde(rename = "K")]
    Kelvin,
    #[serde(rename = "C")]
    Celsius,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PowerUnit {
    #[default]
    #[serde(rename = "W")]
    Watt,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisplayUnits {
    pub temperature: TemperatureUnit,
    pub power: PowerUnit,
}

impl TemperatureUnit {
    pub fn from_kelvin(self, kelvin: f64) -> f64 {
        match self {
            TemperatureUnit::Kelvin => kelvin,
            TemperatureUnit::Celsius => kelvin - CELSIUS_OFFSET,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            TemperatureUnit::Kelvin => "K",
            TemperatureUnit::Celsius => "°C",
        }
    }
}

impl PowerUnit {
    pub fn from_watts(self, watts: f64) -> f64 {
        match self {
            PowerUnit::Watt => watts,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            PowerUnit::Watt => "W",
        }
    }

    pub fn conductance_symbol(self) -> &'static str {
        match self {
            PowerUnit::Watt => "W/K",
        }
    }
}
