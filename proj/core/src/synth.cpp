#include "cocurve/synth.hpp"

#include <cmath>
#include <fstream>

namespace cocurve {

std::pair<QuotePanel, QuotePanel> synth_panels(const ModelParams& params,
                                               const SynthConfig& config) {
    params.validate();
    if (!(config.years > 0.0) || config.gas_contracts < 1 || config.crude_contracts < 1) {
        throw ParameterError("synth_panels: bad horizon or contract counts");
    }
    const int days = static_cast<int>(std::lround(config.years * 365.0));
    const double dt = 1.0 / 365.0;
    const int n = params.dim();

    // every delivery month that is ever inside a quoting window
    const YearMonth first_month{config.start_date.year, config.start_date.month};
    const Date end_date = Date::from_serial(config.start_date.serial() + days - 1);
    const int horizon_months =
        months_between(first_month, YearMonth{end_date.year, end_date.month}) +
        std::max(config.gas_contracts, config.crude_contracts);

    struct Contract {
        YearMonth month;
        double maturity = 0.0;  // years from the start date to first delivery day
        double f0_gas = 0.0, f0_crude = 0.0;
        double euler_gas = 0.0, euler_crude = 0.0;       // running Euler prices
        double ito_gas = 0.0, ito_crude = 0.0;           // exponential-scheme sums
        double qv_gas = 0.0, qv_crude = 0.0;
        double theta_gas = 0.0, theta_crude = 0.0;
    };
    std::vector<Contract> contracts;
    for (int m = 1; m <= horizon_months; ++m) {
        Contract c;
        c.month = first_month.plus_months(m);
        c.maturity = year_fraction(config.start_date, c.month.first_day());
        c.f0_gas = config.gas_spot * std::exp(config.gas_growth * c.maturity);
        c.f0_crude = config.crude_spot * std::exp(config.crude_growth * c.maturity);
        c.euler_gas = c.f0_gas;
        c.euler_crude = c.f0_crude;
        contracts.push_back(c);
    }

    QuotePanel gas, crude;
    gas.energy = Energy::gas;
    gas.unit = "p/th";
    crude.energy = Energy::crude;
    crude.unit = "usd/bbl";

    auto record = [&](const Date& date, const Contract& c) {
        const YearMonth quote_month{date.year, date.month};
        const int ahead = months_between(quote_month, c.month);
        double price_gas, price_crude;
        if (config.scheme == Scheme::euler) {
            price_gas = c.euler_gas;
            price_crude = c.euler_crude;
        } else {
            price_gas = c.f0_gas * std::exp(c.theta_gas + c.ito_gas - 0.5 * c.qv_gas);
            price_crude = c.f0_crude * std::exp(c.theta_crude + c.ito_crude - 0.5 * c.qv_crude);
        }
        if (ahead >= 1 && ahead <= config.gas_contracts) {
            gas.records.push_back({date, c.month, price_gas});
        }
        if (ahead >= 1 && ahead <= config.crude_contracts) {
            crude.records.push_back({date, c.month, price_crude});
        }
    };

    CounterRng rng{config.seed};
    Vector z(n), x_tilde = Vector::Zero(n), dx_tilde(n), dx_full(n);
    const double sqdt = std::sqrt(dt);
    for (int k = 0; k < days; ++k) {
        const Date date = Date::from_serial(config.start_date.serial() + k);
        const double t = k * dt;
        for (const auto& c : contracts) record(date, c);
        // advance the motion and every contract to the next day
        rng.normals(0, static_cast<std::uint32_t>(k), n, z.data());
        dx_tilde.noalias() = params.pi * x_tilde * dt + params.sigma * z * sqdt;
        dx_full = dx_tilde;
        if (!params.theta_prime.empty()) {
            dx_full.noalias() += params.theta_prime.at(t) * dt;
        }
        for (auto& c : contracts) {
            if (c.maturity <= t + dt) continue;  // expired before the next quote date
            for (int e = 0; e < 2; ++e) {
                const Energy energy = e == 0 ? Energy::gas : Energy::crude;
                const Vector sig = stacked_vol(energy, c.maturity - t, params.vol);
                if (config.scheme == Scheme::euler) {
                    double& price = e == 0 ? c.euler_gas : c.euler_crude;
                    price *= 1.0 + sig.dot(dx_full);
                } else {
                    double& ito = e == 0 ? c.ito_gas : c.ito_crude;
                    double& qv = e == 0 ? c.qv_gas : c.qv_crude;
                    double& theta = e == 0 ? c.theta_gas : c.theta_crude;
                    ito += sig.dot(dx_tilde);
                    qv += (sig.transpose() * params.sigma).squaredNorm() * dt;
                    if (!params.theta_prime.empty()) {
                        const auto& knots = params.theta_prime.knots();
                        for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
                            const double a = std::max(knots[p], t);
                            const double b = std::min(knots[p + 1], t + dt);
                            if (b <= a) continue;
                            theta +=
                                stacked_vol_integral(energy, c.maturity, a, b, params.vol)
                                    .dot(params.theta_prime.values().col(
                                        static_cast<Eigen::Index>(p)));
                        }
                    }
                }
            }
        }
        x_tilde += dx_tilde;
    }

    auto sort_panel = [](QuotePanel& p) {
        std::sort(p.records.begin(), p.records.end(),
                  [](const QuoteRecord& a, const QuoteRecord& b) {
                      return std::tie(a.delivery_month, a.quote_date) <
                             std::tie(b.delivery_month, b.quote_date);
                  });
    };
    sort_panel(gas);
    sort_panel(crude);
    return {std::move(gas), std::move(crude)};
}

void write_quotes_csv(const std::string& path, const QuotePanel& panel) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write quotes csv: " + path);
    out << "date,delivery_month,price\n";
    out.precision(17);
    // CSV order is by quote date for readability
    std::vector<const QuoteRecord*> rows;
    rows.reserve(panel.records.size());
    for (const auto& r : panel.records) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const QuoteRecord* a, const QuoteRecord* b) {
        return std::tie(a->quote_date, a->delivery_month) <
               std::tie(b->quote_date, b->delivery_month);
    });
    for (const auto* r : rows) {
        out << r->quote_date.iso() << ',' << r->delivery_month.iso() << ',' << r->price
            << '\n';
    }
}

}  // namespace cocurve
