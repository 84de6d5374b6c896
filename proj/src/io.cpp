#include "flexplan/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flexplan {

using nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

// scalar-or-array series: a number broadcasts, an array is per slot
std::vector<double> read_series(const json& j, const std::string& key) {
    if (!j.contains(key)) return {};
    const json& v = j.at(key);
    if (v.is_number()) return {v.get<double>()};
    return v.get<std::vector<double>>();
}

json series_json(const std::vector<double>& s) {
    if (s.size() == 1) return json(s[0]);
    return json(s);
}

const char* status_name(TxStatus s) {
    switch (s) {
        case TxStatus::Feasible: return "feasible";
        case TxStatus::Infeasible: return "infeasible";
        case TxStatus::NotAvailable: return "not-available";
    }
    return "?";
}

TxStatus status_from(const std::string& s) {
    if (s == "feasible") return TxStatus::Feasible;
    if (s == "infeasible") return TxStatus::Infeasible;
    if (s == "not-available") return TxStatus::NotAvailable;
    throw IoError("unknown transaction status: " + s);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string fmt_eur(double v) { return fmt("%.2f", v); }
std::string fmt_mw(double v) { return fmt("%.3f", v); }
std::string fmt_full(double v) { return fmt("%.17g", v); }

PlantConfig load_plant_config(const std::string& path) {
    json j = read_json_file(path);
    PlantConfig cfg;
    try {
        const json& h = j.at("horizon");
        cfg.horizon.n_slots = h.at("n_slots").get<int>();
        cfg.horizon.slot_hours = h.value("slot_hours", 1.0);

        for (const json& m : j.value("machines", json::array())) {
            Machine mk;
            mk.id = m.value("id", "");
            mk.power_mw = m.at("power_mw").get<double>();
            mk.production_tph = read_series(m, "production_tph");
            mk.min_on_slots = m.value("min_on_slots", 0);
            mk.min_off_slots = m.value("min_off_slots", 0);
            cfg.machines.push_back(std::move(mk));
        }
        for (const json& s : j.value("silos", json::array())) {
            Silo si;
            si.id = s.value("id", "");
            si.capacity_max_t = s.at("capacity_max_t").get<double>();
            si.capacity_min_t = s.value("capacity_min_t", 0.0);
            si.initial_t = s.at("initial_t").get<double>();
            si.storage_cost = s.value("storage_cost", 0.0);
            cfg.silos.push_back(std::move(si));
        }
        if (j.contains("battery")) {
            const json& b = j.at("battery");
            cfg.battery.capacity_mwh = b.value("capacity_mwh", 0.0);
            cfg.battery.dod = b.value("dod", 0.0);
            cfg.battery.soc0_mwh = b.value("soc0_mwh", cfg.battery.soc_min());
            cfg.battery.p_charge_max_mw = b.value("p_charge_max_mw", 0.0);
            cfg.battery.p_discharge_max_mw = b.value("p_discharge_max_mw", 0.0);
            cfg.battery.wear_cost = b.value("wear_cost", 0.0);
        }
        if (j.contains("grid"))
            cfg.grid.p_buy_max_mw = j.at("grid").value("p_buy_max_mw", 0.0);
        cfg.pv_power_mw = read_series(j, "pv_power_mw");
        cfg.demand_tph = read_series(j, "demand_tph");
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    auto viols = validate_config(cfg);
    for (const auto& v : viols)
        if (v.severity == Severity::Error)
            throw IoError(path + ": invalid plant config: " + describe(viols));
    return cfg;
}

void save_plant_config(const PlantConfig& cfg, const std::string& path) {
    json j;
    j["horizon"] = {{"n_slots", cfg.horizon.n_slots},
                    {"slot_hours", cfg.horizon.slot_hours}};
    j["machines"] = json::array();
    for (const auto& m : cfg.machines)
        j["machines"].push_back({{"id", m.id},
                                 {"power_mw", m.power_mw},
                                 {"production_tph", series_json(m.production_tph)},
                                 {"min_on_slots", m.min_on_slots},
                                 {"min_off_slots", m.min_off_slots}});
    j["silos"] = json::array();
    for (const auto& s : cfg.silos)
        j["silos"].push_back({{"id", s.id},
                              {"capacity_max_t", s.capacity_max_t},
                              {"capacity_min_t", s.capacity_min_t},
                              {"initial_t", s.initial_t},
                              {"storage_cost", s.storage_cost}});
    j["battery"] = {{"capacity_mwh", cfg.battery.capacity_mwh},
                    {"dod", cfg.battery.dod},
                    {"soc0_mwh", cfg.battery.soc0_mwh},
                    {"p_charge_max_mw", cfg.battery.p_charge_max_mw},
                    {"p_discharge_max_mw", cfg.battery.p_discharge_max_mw},
                    {"wear_cost", cfg.battery.wear_cost}};
    j["grid"] = {{"p_buy_max_mw", cfg.grid.p_buy_max_mw}};
    j["pv_power_mw"] = series_json(cfg.pv_power_mw);
    j["demand_tph"] = series_json(cfg.demand_tph);
    write_text_file(path, j.dump(2) + "\n");
}

void write_schedule_json(const PlantConfig& cfg, const Schedule& s,
                         const std::string& path) {
    json j;
    j["n_slots"] = cfg.horizon.n_slots;
    j["cost_eur"] = s.cost_eur;
    j["buy_mw"] = s.buy_mw;
    j["sell_mw"] = s.sell_mw;
    j["charge_mw"] = s.charge_mw;
    j["discharge_mw"] = s.discharge_mw;
    j["machine_on"] = s.machine_on;
    j["silo_level_t"] = s.silo_level_t;
    write_text_file(path, j.dump(2) + "\n");
}

Schedule read_schedule_json(const std::string& path) {
    json j = read_json_file(path);
    Schedule s;
    try {
        s.cost_eur = j.at("cost_eur").get<double>();
        s.buy_mw = j.at("buy_mw").get<std::vector<double>>();
        s.sell_mw = j.at("sell_mw").get<std::vector<double>>();
        s.charge_mw = j.at("charge_mw").get<std::vector<double>>();
        s.discharge_mw = j.at("discharge_mw").get<std::vector<double>>();
        s.machine_on = j.at("machine_on").get<std::vector<std::vector<int>>>();
        s.silo_level_t =
            j.at("silo_level_t").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    return s;
}

void write_schedule_csv(const PlantConfig& cfg, const Schedule& s,
                        const std::string& path) {
    std::ostringstream os;
    os << "slot,buy_mw,sell_mw,charge_mw,discharge_mw";
    for (size_t k = 0; k < s.machine_on.size(); ++k)
        os << ",on_"
           << (k < cfg.machines.size() && !cfg.machines[k].id.empty()
                   ? cfg.machines[k].id
                   : "m" + std::to_string(k + 1));
    for (size_t i = 0; i < s.silo_level_t.size(); ++i)
        os << ",level_t_"
           << (i < cfg.silos.size() && !cfg.silos[i].id.empty()
                   ? cfg.silos[i].id
                   : "s" + std::to_string(i + 1));
    os << '\n';
    for (size_t t = 0; t < s.buy_mw.size(); ++t) {
        os << (t + 1) << ',' << fmt_mw(s.buy_mw[t]) << ',' << fmt_mw(s.sell_mw[t])
           << ',' << fmt_mw(s.charge_mw[t]) << ',' << fmt_mw(s.discharge_mw[t]);
        for (const auto& row : s.machine_on) os << ',' << row[t];
        for (const auto& row : s.silo_level_t) os << ',' << fmt_mw(row[t]);
        os << '\n';
    }
    os << "# cost_eur," << fmt_eur(s.cost_eur) << '\n';
    write_text_file(path, os.str());
}

Schedule read_schedule_csv(const PlantConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    const int nk = static_cast<int>(cfg.machines.size());
    const int ns = static_cast<int>(cfg.silos.size());
    Schedule s;
    s.machine_on.assign(nk, {});
    s.silo_level_t.assign(ns, {});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto c = split(line, ',');
            if (c.size() == 2 && c[0] == "# cost_eur") s.cost_eur = std::stod(c[1]);
            continue;
        }
        auto c = split(line, ',');
        if (static_cast<int>(c.size()) != 5 + nk + ns)
            throw IoError(path + ": wrong field count in row '" + line + "'");
        s.buy_mw.push_back(std::stod(c[1]));
        s.sell_mw.push_back(std::stod(c[2]));
        s.charge_mw.push_back(std::stod(c[3]));
        s.discharge_mw.push_back(std::stod(c[4]));
        for (int k = 0; k < nk; ++k)
            s.machine_on[k].push_back(std::stoi(c[5 + k]));
        for (int i = 0; i < ns; ++i)
            s.silo_level_t[i].push_back(std::stod(c[5 + nk + i]));
    }
    return s;
}

void write_transactions_csv(const std::vector<FlexTransaction>& txs,
                            const std::string& path) {
    std::ostringstream os;
    os << "tau,dayahead_eur_mwh,tertiary_eur_mwh,spread_eur_mwh,h_mw,"
          "gross_eur,flex_cost_eur,profit_eur,status\n";
    auto opt = [&os](const std::optional<double>& v, std::string (*f)(double)) {
        if (v) os << f(*v);
        os << ',';
    };
    for (const auto& tx : txs) {
        os << tx.tau << ',' << fmt_eur(tx.dayahead_price) << ',';
        if (tx.tertiary_price) os << fmt_eur(*tx.tertiary_price);
        os << ',';
        opt(tx.spread, fmt_eur);
        os << fmt_mw(tx.h_mw) << ',';
        opt(tx.gross_eur, fmt_eur);
        opt(tx.flex_cost_eur, fmt_eur);
        opt(tx.profit_eur, fmt_eur);
        os << status_name(tx.status) << '\n';
    }
    write_text_file(path, os.str());
}

void write_transactions_json(const std::vector<FlexTransaction>& txs,
                             const std::string& path) {
    json arr = json::array();
    for (const auto& tx : txs) {
        json j;
        j["tau"] = tx.tau;
        j["h_mw"] = tx.h_mw;
        j["direction"] = tx.direction == Direction::Sell ? "sell" : "buy";
        j["status"] = status_name(tx.status);
        j["dayahead_eur_mwh"] = tx.dayahead_price;
        auto put = [&j](const char* key, const std::optional<double>& v) {
            if (v) j[key] = *v;
        };
        put("tertiary_eur_mwh", tx.tertiary_price);
        put("spread_eur_mwh", tx.spread);
        put("gross_eur", tx.gross_eur);
        put("flex_cost_eur", tx.flex_cost_eur);
        put("profit_eur", tx.profit_eur);
        arr.push_back(std::move(j));
    }
    write_text_file(path, arr.dump(2) + "\n");
}

std::vector<FlexTransaction> read_transactions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file");
    std::vector<FlexTransaction> out;
    auto opt = [](const std::string& cell) -> std::optional<double> {
        if (cell.empty()) return std::nullopt;
        return std::stod(cell);
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto c = split(line, ',');
        if (c.size() != 9)
            throw IoError(path + ": wrong field count in row '" + line + "'");
        FlexTransaction tx;
        tx.tau = std::stoi(c[0]);
        tx.dayahead_price = std::stod(c[1]);
        tx.tertiary_price = opt(c[2]);
        tx.spread = opt(c[3]);
        tx.h_mw = std::stod(c[4]);
        tx.direction = tx.h_mw < 0 ? Direction::Sell : Direction::Buy;
        tx.gross_eur = opt(c[5]);
        tx.flex_cost_eur = opt(c[6]);
        tx.profit_eur = opt(c[7]);
        tx.status = status_from(c[8]);
        out.push_back(std::move(tx));
    }
    return out;
}

StudyManifest load_study_manifest(const std::string& path) {
    json j = read_json_file(path);
    StudyManifest m;
    try {
        m.config_path = j.at("config").get<std::string>();
        m.prices_path = j.at("prices").get<std::string>();
        m.pv_profile_path = j.value("pv_profile", "");
        if (j.contains("grid")) {
            m.grid.pv_capacities_mw =
                j.at("grid").value("pv_mw", std::vector<double>{});
            m.grid.battery_capacities_mwh =
                j.at("grid").value("battery_mwh", std::vector<double>{});
        }
        if (j.contains("capital")) {
            m.capital.pv_eur_per_mw =
                j.at("capital").value("pv_eur_per_mw", m.capital.pv_eur_per_mw);
            m.capital.battery_eur_per_mwh = j.at("capital").value(
                "battery_eur_per_mwh", m.capital.battery_eur_per_mwh);
        }
        std::string dir = j.value("direction", "sell");
        if (dir == "sell")
            m.direction = Direction::Sell;
        else if (dir == "buy")
            m.direction = Direction::Buy;
        else
            throw IoError(path + ": direction must be 'sell' or 'buy'");
        m.h_magnitude_mw = j.at("h_mw").get<double>();
        m.eps_min = j.value("eps_min", 0.05);
        m.eps_max = j.value("eps_max", 0.05);
        m.equal_run_hours = j.value("equal_run_hours", false);
        m.gap_tol = j.value("gap_tol", 1e-6);
        m.backend_name = j.value("backend", std::string("internal"));
        m.reset_soc_per_window = j.value("reset_soc_per_window", false);
        m.out_dir = j.value("out", std::string("."));
    } catch (const json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    if (m.h_magnitude_mw <= 0)
        throw IoError(path + ": h_mw must be a positive magnitude");
    return m;
}

std::vector<double> load_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto c = split(line, ',');
        const std::string& cell = c.back();
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            if (out.empty()) continue;  // tolerate a header line
            throw IoError(path + ": malformed value '" + cell + "'");
        }
    }
    if (out.empty()) throw IoError(path + ": no values");
    return out;
}

void write_study_outputs(const std::vector<ScenarioResult>& results,
                         const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto path = [&dir](const char* name) {
        return (std::filesystem::path(dir) / name).string();
    };

    std::ostringstream main_csv;
    main_csv << "config,pv_mw,battery_mwh,committed_cost_eur,"
                "flex_revenue_eur,production_savings_eur,payback_years,"
                "amortizable,n_accepted,flexible_hours_avg\n";
    std::ostringstream rev, hours, counts, payback;
    rev << "config,flex_revenue_eur,production_savings_eur\n";
    hours << "config,flexible_hours_avg\n";
    counts << "config,n_accepted\n";
    payback << "config,payback_years\n";

    for (const auto& r : results) {
        main_csv << r.config_id << ',' << fmt_mw(r.pv_mw) << ','
                 << fmt_mw(r.battery_mwh) << ',' << fmt_eur(r.committed_cost_eur)
                 << ',' << fmt_eur(r.flex_revenue_eur) << ','
                 << fmt_eur(r.production_savings_eur) << ','
                 << (r.amortizable ? fmt("%.2f", r.payback_years) : "inf") << ','
                 << (r.amortizable ? "yes" : "no") << ',' << r.n_accepted << ','
                 << fmt("%.2f", r.flexible_hours_avg) << '\n';
        rev << r.config_id << ',' << fmt_eur(r.flex_revenue_eur) << ','
            << fmt_eur(r.production_savings_eur) << '\n';
        hours << r.config_id << ',' << fmt("%.2f", r.flexible_hours_avg) << '\n';
        counts << r.config_id << ',' << r.n_accepted << '\n';
        payback << r.config_id << ','
                << (r.amortizable ? fmt("%.2f", r.payback_years) : "inf") << '\n';
    }
    write_text_file(path("scenario_results.csv"), main_csv.str());
    write_text_file(path("fig_revenues_savings.csv"), rev.str());
    write_text_file(path("fig_flexible_hours.csv"), hours.str());
    write_text_file(path("fig_transaction_counts.csv"), counts.str());
    write_text_file(path("fig_payback.csv"), payback.str());
}

}  // namespace flexplan
