#pragma once

#include <string>
#include <vector>

#include "cocurve/dates.hpp"
#include "cocurve/linalg.hpp"
#include "cocurve/model.hpp"

namespace cocurve {

struct QuoteRecord {
    Date quote_date;
    YearMonth delivery_month;
    double price = 0.0;
};

struct RejectedRow {
    std::size_t row = 0;  // 1-based line number in the source file
    std::string reason;
};

// Validated futures quotes for one energy. Records are sorted by
// (delivery_month, quote_date) and unique per (quote_date, delivery_month).
struct QuotePanel {
    Energy energy = Energy::gas;
    std::string unit;  // label only, e.g. "p/th" or "usd/bbl"
    std::vector<QuoteRecord> records;
    std::vector<RejectedRow> rejected;

    std::vector<YearMonth> delivery_months() const;
    std::vector<Date> quote_dates() const;
};

struct LoadOptions {
    std::string unit;
};

// CSV with header `date,delivery_month,price`. Rows violating invariants are
// collected into the rejection report; duplicates are a hard error.
QuotePanel load_quotes(const std::string& path, Energy energy, const LoadOptions& opts = {});

void write_rejection_report(const std::string& path, const std::vector<RejectedRow>& rows);

struct ReturnObservation {
    Date date;          // second leg of the return
    int bucket = 0;     // months to delivery, measured at the first leg
    double tenor = 0.0; // T - t in years at the first leg
    double dt = 0.0;    // elapsed years between the two legs
    double value = 0.0; // simple return
};

// Per-contract simple returns between consecutive quote dates, bucketed by
// months to delivery. Returns never span two delivery months.
struct ReturnPanel {
    Energy energy = Energy::gas;
    std::vector<ReturnObservation> observations;
    std::vector<std::string> warnings;  // |return| >= 1 and similar findings

    int max_bucket() const;
    // Dates carrying a complete bucket cross-section 1..max_bucket, as a
    // dense matrix for PCA: one row per date, one column per bucket.
    struct CrossSection {
        std::vector<Date> dates;
        Matrix returns;       // dates x buckets
        Matrix tenors;        // matching tenor of each cell
        std::vector<double> dts;  // elapsed time per row
        std::size_t dropped_dates = 0;
    };
    CrossSection cross_section() const;

    // Every date with at least min_obs observations, ragged: used by the
    // time-constant fit and the motion reconstruction so that days with a
    // partial cross-section still contribute their increment.
    struct DateGroup {
        Date date;
        double dt = 0.0;
        std::vector<double> tenors;
        std::vector<double> values;
    };
    std::vector<DateGroup> by_date(int min_obs) const;
};

ReturnPanel compute_returns(const QuotePanel& panel);

struct PricePoint {
    Date date;
    double price;
};

// Quote history of a single delivery month.
std::vector<PricePoint> fixed_maturity_series(const QuotePanel& panel,
                                              const YearMonth& delivery_month);

// Initial term structure F(0, T): prices per maturity in ACT/365 years from
// the valuation date to the first day of each delivery month.
struct ForwardCurve {
    Energy energy = Energy::gas;
    Date valuation_date;
    std::vector<double> maturities;  // strictly increasing, years
    std::vector<double> prices;

    // log-linear interpolation, flat extrapolation beyond the ends
    double at(double maturity) const;
    void validate() const;
};

ForwardCurve initial_curve(const QuotePanel& panel, const Date& valuation_date);

}  // namespace cocurve
