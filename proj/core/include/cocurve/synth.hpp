#pragma once

#include "cocurve/market_data.hpp"
#include "cocurve/model.hpp"
#include "cocurve/simulation.hpp"

namespace cocurve {

struct SynthConfig {
    double years = 5.0;
    int gas_contracts = 9;
    int crude_contracts = 15;
    Date start_date{2015, 1, 2};
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::euler;
    double gas_spot = 40.0;
    double gas_growth = 0.03;  // log-slope of the synthetic initial curve
    double crude_spot = 60.0;
    double crude_growth = 0.02;
};

// Daily quote panels for both energies driven by one shared motion path.
// Each delivery month is quoted while it is 1..K months ahead of the quote
// date; prices evolve from a smooth synthetic initial curve.
std::pair<QuotePanel, QuotePanel> synth_panels(const ModelParams& params,
                                               const SynthConfig& config);

void write_quotes_csv(const std::string& path, const QuotePanel& panel);

}  // namespace cocurve
