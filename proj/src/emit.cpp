#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "choicebandit/harness.hpp"

namespace choicebandit {

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

struct Series {
    std::string name;
    const std::vector<double>* y;
    double x0;  // x of the first point; points are spaced by 1
};

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
    const int width = 860, height = 520;
    const double left = 70, right = width - 25, top = 45, bottom = height - 55;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Series& s : series) {
        if (s.y->empty()) continue;
        xmin = std::min(xmin, s.x0);
        xmax = std::max(xmax, s.x0 + static_cast<double>(s.y->size() - 1));
        for (double v : *s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmin < xmax)) xmax = xmin + 1.0;
    if (!(ymin < ymax)) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
    auto sy = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
        << "\">\n"
        << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << xml_escape(title) << "</text>\n";

    // axes and ticks
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right
        << "\" y2=\"" << bottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double fx = xmin + (xmax - xmin) * k / 5.0;
        const double fy = ymin + (ymax - ymin) * k / 5.0;
        svg << "<line x1=\"" << sx(fx) << "\" y1=\"" << bottom << "\" x2=\"" << sx(fx)
            << "\" y2=\"" << bottom + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << sx(fx) << "\" y=\"" << bottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt4(fx) << "</text>\n"
            << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << left
            << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << left - 8 << "\" y=\"" << sy(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt4(fy) << "</text>\n";
    }
    svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << xml_escape(x_label) << "</text>\n"
        << "<text x=\"18\" y=\"" << (top + bottom) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 "
        << (top + bottom) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";

    for (size_t i = 0; i < series.size(); ++i) {
        const Series& s = series[i];
        const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.4\" points=\"";
        for (size_t t = 0; t < s.y->size(); ++t) {
            if (t) svg << ' ';
            svg << fmt4(sx(s.x0 + static_cast<double>(t))) << ',' << fmt4(sy((*s.y)[t]));
        }
        svg << "\"/>\n";
        const double ly = top + 16.0 * static_cast<double>(i);
        svg << "<line x1=\"" << right - 150 << "\" y1=\"" << ly << "\" x2=\""
            << right - 125 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << right - 120 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.name)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace

std::string csv_text(const AggregateResult& result) {
    std::string out = "step,variant,mean_reward,pct_optimal\n";
    for (const VariantAggregate& v : result.variants) {
        for (long t = 0; t < result.steps; ++t) {
            out += std::to_string(t + 1);
            out += ',';
            out += v.name;
            out += ',';
            out += fmt9(v.mean_reward[t]);
            out += ',';
            out += fmt9(v.pct_optimal[t]);
            out += '\n';
        }
    }
    return out;
}

void emit_csv(const AggregateResult& result, const std::string& path) {
    write_file(path, csv_text(result));
}

std::vector<std::string> emit_svg(const AggregateResult& result, const std::string& dir) {
    std::vector<std::string> written;
    std::vector<Series> reward, optimal, learned;
    for (const VariantAggregate& v : result.variants) {
        reward.push_back({v.name, &v.mean_reward, 1.0});
        optimal.push_back({v.name, &v.pct_optimal, 1.0});
        learned.push_back({v.name, &v.learned_value, 0.0});
    }
    learned.push_back({"environment mean", &result.env_mean_reference, 0.0});

    const std::string base = dir + "/" + result.experiment;
    write_file(base + "-mean-reward.svg",
               line_chart(result.experiment + ": average reward", "step",
                          "average reward", reward));
    written.push_back(base + "-mean-reward.svg");
    write_file(base + "-pct-optimal.svg",
               line_chart(result.experiment + ": share of optimal plays", "step",
                          "optimal action share", optimal));
    written.push_back(base + "-pct-optimal.svg");
    write_file(base + "-learned-values.svg",
               line_chart(result.experiment + ": learned per-arm reward", "arm",
                          "mean observed reward", learned));
    written.push_back(base + "-learned-values.svg");
    return written;
}

nlohmann::json metadata_json(const ExperimentConfig& config, const AggregateResult& result) {
    nlohmann::json j;
    j["config"] = config.to_json();
    for (const VariantAggregate& v : result.variants) {
        nlohmann::json vj;
        vj["name"] = v.name;
        vj["avg_reward"] = v.avg_reward;
        vj["avg_reward_se"] = v.avg_reward_se;
        vj["avg_pct_optimal"] = v.avg_pct_optimal;
        vj["final_pct_optimal"] = v.final_pct_optimal;
        vj["final_pct_optimal_se"] = v.final_pct_optimal_se;
        vj["min_sampled_prob"] = v.min_sampled_prob;
        vj["final_preferences"] = v.final_preferences;
        vj["learned_value"] = v.learned_value;
        j["variants"].push_back(std::move(vj));
    }
    j["env_mean_reference"] = result.env_mean_reference;
    return j;
}

void emit_regret_csv(const RegretSummary& summary, const std::string& path) {
    std::string out = "variant,sequence,measured,se,bound,eta,margin\n";
    for (const RegretEntry& e : summary.entries) {
        out += e.variant + ',' + e.sequence + ',' + fmt9(e.measured) + ',' + fmt9(e.se) +
               ',' + fmt9(e.bound) + ',' + fmt9(e.eta) + ',' + fmt9(e.margin) + '\n';
    }
    write_file(path, out);
}

}  // namespace choicebandit
