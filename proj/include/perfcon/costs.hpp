#pragma once

#include <array>
#include <cstdio>
#include <ostream>
#include <string>

#include "perfcon/ledger.hpp"

namespace perfcon {

/// Gas and fiat cost breakdown over a transaction log. Gas stays exact
/// integer; coin and fiat amounts are derived from it in one step at the end
/// (coin = gas x price[gigaunits] x 1e-9).
struct cost_report {
    int64_t total_gas = 0;
    std::array<int64_t, 10> gas_by_kind{};
    std::array<double, 10> share_by_kind{};
    double gas_price_gigaunits = 0.0;
    double fiat_rate = 0.0;  // currency units per coin
    double coin_cost = 0.0;
    double fiat_cost = 0.0;

    int64_t gas_of(tx_kind k) const { return gas_by_kind[static_cast<size_t>(k)]; }
    double share_of(tx_kind k) const { return share_by_kind[static_cast<size_t>(k)]; }
};

inline cost_report build_cost_report(const ledger& led, double gas_price_gigaunits, double fiat_rate) {
    cost_report r;
    gas_totals_result t = led.gas_totals();
    r.total_gas = t.total;
    r.gas_by_kind = t.by_kind;
    for (size_t i = 0; i < r.gas_by_kind.size(); ++i)
        r.share_by_kind[i] = t.total == 0 ? 0.0 : static_cast<double>(r.gas_by_kind[i]) / static_cast<double>(t.total);
    r.gas_price_gigaunits = gas_price_gigaunits;
    r.fiat_rate = fiat_rate;
    r.coin_cost = static_cast<double>(r.total_gas) * gas_price_gigaunits * 1e-9;
    r.fiat_cost = r.coin_cost * fiat_rate;
    return r;
}

/// Aligned text rendering: coins to 4 decimals, fiat to 2. Formatting is
/// snprintf-based so caller stream flags cannot distort the report.
inline void print_cost_report(std::ostream& os, const cost_report& r) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%g", r.gas_price_gigaunits);
    os << "gas price        " << buf << " gigaunits/gas\n";
    std::snprintf(buf, sizeof(buf), "%g", r.fiat_rate);
    os << "fiat rate        " << buf << " /coin\n";
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(r.total_gas));
    os << "total gas        " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.4f", r.coin_cost);
    os << "coin cost        " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.2f", r.fiat_cost);
    os << "fiat cost        " << buf << '\n';
    os << "by kind:\n";
    for (tx_kind k : all_tx_kinds) {
        if (r.gas_of(k) == 0)
            continue;
        std::snprintf(buf, sizeof(buf), "  %-18s %14lld  %6.2f%%", std::string(tx_kind_name(k)).c_str(),
                      static_cast<long long>(r.gas_of(k)), 100.0 * r.share_of(k));
        os << buf << '\n';
    }
}

}  // namespace perfcon
