#include "cocurve/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cocurve {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<YearMonth> QuotePanel::delivery_months() const {
    std::set<YearMonth> months;
    for (const auto& r : records) months.insert(r.delivery_month);
    return {months.begin(), months.end()};
}

std::vector<Date> QuotePanel::quote_dates() const {
    std::set<Date> dates;
    for (const auto& r : records) dates.insert(r.quote_date);
    return {dates.begin(), dates.end()};
}

QuotePanel load_quotes(const std::string& path, Energy energy, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open quote file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("empty quote file: " + path);
    }
    {
        auto header = split_csv_line(line);
        if (header.size() != 3 || trim(header[0]) != "date" ||
            trim(header[1]) != "delivery_month" || trim(header[2]) != "price") {
            throw FormatError(path + ": expected header 'date,delivery_month,price'");
        }
    }

    QuotePanel panel;
    panel.energy = energy;
    panel.unit = opts.unit;
    std::set<std::pair<Date, YearMonth>> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            panel.rejected.push_back({line_no, "expected 3 fields"});
            continue;
        }
        Date d;
        YearMonth m;
        double price;
        try {
            d = Date::parse(trim(fields[0]));
            m = YearMonth::parse(trim(fields[1]));
            std::size_t used = 0;
            price = std::stod(trim(fields[2]), &used);
            if (used != trim(fields[2]).size()) throw FormatError("trailing junk in price");
        } catch (const std::exception& e) {
            panel.rejected.push_back({line_no, e.what()});
            continue;
        }
        if (!(price > 0.0) || !std::isfinite(price)) {
            panel.rejected.push_back({line_no, "price not strictly positive"});
            continue;
        }
        if (!(d < m.first_day())) {
            panel.rejected.push_back({line_no, "quote date not before delivery month"});
            continue;
        }
        if (!seen.insert({d, m}).second) {
            throw DataError(path + ": duplicate quote for " + d.iso() + " / " + m.iso());
        }
        panel.records.push_back({d, m, price});
    }
    if (panel.records.empty()) {
        throw DataError(path + ": no valid quotes");
    }
    std::sort(panel.records.begin(), panel.records.end(),
              [](const QuoteRecord& a, const QuoteRecord& b) {
                  return std::tie(a.delivery_month, a.quote_date) <
                         std::tie(b.delivery_month, b.quote_date);
              });
    return panel;
}

void write_rejection_report(const std::string& path, const std::vector<RejectedRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write rejection report: " + path);
    }
    out << "row,reason\n";
    for (const auto& r : rows) {
        std::string reason = r.reason;
        std::replace(reason.begin(), reason.end(), ',', ';');
        out << r.row << "," << reason << "\n";
    }
}

ReturnPanel compute_returns(const QuotePanel& panel) {
    ReturnPanel out;
    out.energy = panel.energy;

    std::vector<QuoteRecord> records = panel.records;
    std::sort(records.begin(), records.end(),
              [](const QuoteRecord& a, const QuoteRecord& b) {
                  return std::tie(a.delivery_month, a.quote_date) <
                         std::tie(b.delivery_month, b.quote_date);
              });

    std::size_t i = 0;
    while (i < records.size()) {
        std::size_t j = i;
        while (j < records.size() &&
               records[j].delivery_month == records[i].delivery_month) {
            ++j;
        }
        const Date delivery = records[i].delivery_month.first_day();
        for (std::size_t k = i + 1; k < j; ++k) {
            const auto& prev = records[k - 1];
            const auto& cur = records[k];
            ReturnObservation obs;
            obs.date = cur.quote_date;
            obs.bucket = months_between(
                YearMonth{prev.quote_date.year, prev.quote_date.month},
                cur.delivery_month);
            obs.tenor = year_fraction(prev.quote_date, delivery);
            obs.dt = year_fraction(prev.quote_date, cur.quote_date);
            obs.value = (cur.price - prev.price) / prev.price;
            if (std::abs(obs.value) >= 1.0) {
                out.warnings.push_back("return of " + std::to_string(obs.value) + " on " +
                                       cur.quote_date.iso() + " for " +
                                       cur.delivery_month.iso());
            }
            out.observations.push_back(obs);
        }
        i = j;
    }
    if (out.observations.empty()) {
        throw InsufficientDataError("compute_returns: no contract has two quote dates");
    }
    return out;
}

int ReturnPanel::max_bucket() const {
    int m = 0;
    for (const auto& o : observations) m = std::max(m, o.bucket);
    return m;
}

ReturnPanel::CrossSection ReturnPanel::cross_section() const {
    const int buckets = max_bucket();
    std::map<Date, std::map<int, const ReturnObservation*>> by_date;
    for (const auto& o : observations) {
        if (o.bucket >= 1 && o.bucket <= buckets) by_date[o.date][o.bucket] = &o;
    }
    CrossSection cs;
    for (const auto& [date, row] : by_date) {
        if (static_cast<int>(row.size()) != buckets) {
            ++cs.dropped_dates;
            continue;
        }
        cs.dates.push_back(date);
    }
    cs.returns.resize(static_cast<Eigen::Index>(cs.dates.size()), buckets);
    cs.tenors.resize(static_cast<Eigen::Index>(cs.dates.size()), buckets);
    cs.dts.resize(cs.dates.size());
    for (std::size_t r = 0; r < cs.dates.size(); ++r) {
        const auto& row = by_date[cs.dates[r]];
        for (int b = 1; b <= buckets; ++b) {
            const auto* o = row.at(b);
            cs.returns(static_cast<Eigen::Index>(r), b - 1) = o->value;
            cs.tenors(static_cast<Eigen::Index>(r), b - 1) = o->tenor;
        }
        cs.dts[r] = row.at(1)->dt;
    }
    return cs;
}

std::vector<ReturnPanel::DateGroup> ReturnPanel::by_date(int min_obs) const {
    std::map<Date, DateGroup> groups;
    for (const auto& o : observations) {
        auto& g = groups[o.date];
        if (g.tenors.empty()) {
            g.date = o.date;
            g.dt = o.dt;
        }
        g.tenors.push_back(o.tenor);
        g.values.push_back(o.value);
    }
    std::vector<DateGroup> out;
    out.reserve(groups.size());
    for (auto& [date, g] : groups) {
        if (static_cast<int>(g.tenors.size()) >= min_obs) {
            out.push_back(std::move(g));
        }
    }
    return out;
}

std::vector<PricePoint> fixed_maturity_series(const QuotePanel& panel,
                                              const YearMonth& delivery_month) {
    std::vector<PricePoint> series;
    for (const auto& r : panel.records) {
        if (r.delivery_month == delivery_month) {
            series.push_back({r.quote_date, r.price});
        }
    }
    if (series.empty()) {
        throw NotFoundError("no quotes for delivery month " + delivery_month.iso());
    }
    std::sort(series.begin(), series.end(),
              [](const PricePoint& a, const PricePoint& b) { return a.date < b.date; });
    return series;
}

double ForwardCurve::at(double maturity) const {
    validate();
    if (maturity <= maturities.front()) return prices.front();
    if (maturity >= maturities.back()) return prices.back();
    const auto it = std::upper_bound(maturities.begin(), maturities.end(), maturity);
    const std::size_t hi = static_cast<std::size_t>(it - maturities.begin());
    const std::size_t lo = hi - 1;
    const double w = (maturity - maturities[lo]) / (maturities[hi] - maturities[lo]);
    return std::exp((1.0 - w) * std::log(prices[lo]) + w * std::log(prices[hi]));
}

void ForwardCurve::validate() const {
    if (maturities.empty() || maturities.size() != prices.size()) {
        throw DataError("ForwardCurve: empty or mismatched grids");
    }
    for (std::size_t k = 0; k < maturities.size(); ++k) {
        if (!(prices[k] > 0.0)) throw DataError("ForwardCurve: non-positive price");
        if (k > 0 && !(maturities[k] > maturities[k - 1])) {
            throw DataError("ForwardCurve: maturities not increasing");
        }
    }
}

ForwardCurve initial_curve(const QuotePanel& panel, const Date& valuation_date) {
    ForwardCurve curve;
    curve.energy = panel.energy;
    curve.valuation_date = valuation_date;
    std::map<double, double> points;
    for (const auto& r : panel.records) {
        if (r.quote_date == valuation_date) {
            points[year_fraction(valuation_date, r.delivery_month.first_day())] = r.price;
        }
    }
    if (points.empty()) {
        throw DataError("initial_curve: no quotes on " + valuation_date.iso());
    }
    for (const auto& [t, p] : points) {
        curve.maturities.push_back(t);
        curve.prices.push_back(p);
    }
    curve.validate();
    return curve;
}

}  // namespace cocurve
