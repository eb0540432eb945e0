#include "hyperprop/model_io.hpp"

#include "hyperprop/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace hyperprop {

namespace {

using nlohmann::json;

const json& field(const json& j, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw InvalidSpec(std::string("model: missing field `") + name + "`");
    return *it;
}

std::vector<std::string> strings(const json& j, const char* name, std::size_t n) {
    const json& a = field(j, name);
    if (!a.is_array() || a.size() != n)
        throw InvalidSpec(std::string("model: `") + name + "` must be an array of " + std::to_string(n) + " strings");
    std::vector<std::string> out;
    for (const auto& e : a) {
        if (e.is_string())
            out.push_back(e.get<std::string>());
        else if (e.is_number())
            out.push_back(e.dump());
        else
            throw InvalidSpec(std::string("model: entries of `") + name + "` must be expression strings");
    }
    return out;
}

} // namespace

SystemSpec parse_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidSpec(std::string("model: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw InvalidSpec("model: top level must be an object");

    try {
        auto n = field(j, "n").get<std::size_t>();
        auto m = field(j, "m").get<std::size_t>();
        auto speeds = strings(j, "speeds", n);
        auto dampings = strings(j, "dampings", n);
        bool autonomous = j.value("autonomous", false);
        double floor = field(j, "speed_floor").get<double>();
        ValidationBox box;
        if (auto it = j.find("validation_box"); it != j.end()) {
            box.T_max = it->value("T_max", box.T_max);
            box.xi_radius = it->value("xi_radius", box.xi_radius);
        }

        const json& b = field(j, "boundary");
        if (auto lin = b.find("linear"); lin != b.end()) {
            const json& P = field(*lin, "P");
            if (!P.is_array() || P.size() != n) throw InvalidSpec("model: `boundary.linear.P` must be n x n");
            Eigen::MatrixXd M(n, n);
            for (std::size_t r = 0; r < n; ++r) {
                if (!P[r].is_array() || P[r].size() != n) throw InvalidSpec("model: `boundary.linear.P` must be n x n");
                for (std::size_t c = 0; c < n; ++c) M(r, c) = P[r][c].get<double>();
            }
            return SystemSpec::from_text(m, speeds, dampings, M, autonomous, floor, box);
        }
        if (auto nl = b.find("nonlinear"); nl != b.end())
            return SystemSpec::from_text(m, speeds, dampings, strings(*nl, "h", n), autonomous, floor, box);
        throw InvalidSpec("model: `boundary` needs a `linear` or `nonlinear` entry");
    } catch (const json::exception& e) {
        throw InvalidSpec(std::string("model: wrong field type: ") + e.what());
    }
}

SystemSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open model file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

} // namespace hyperprop
