#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "crackle/pipeline.hpp"

namespace crackle {

namespace {


}  // namespace

std::string results_to_csv(std::span<const ClassificationResult> results,
                           const std::string& config_echo) {
    std::string out = "# config: " + config_echo + "\n";
    out += "source_id,start_time,end_time,label,confidence\n";
    char buf[256];
    for (const auto& r : results) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%s,%.6f\n", r.source_id.c_str(),
                      r.start_time, r.end_time, label_name(r.label), r.confidence);
        out += buf;
    }
    return out;
}

std::string eval_reports_to_csv(std::span<const NamedReport> reports,
                                const std::string& config_echo) {
    std::string out = "# config: " + config_echo + "\n";
    out += "classifier,cycle,precision,recall,f1,tp,fp,fn,tn\n";
    char buf[256];
    for (const auto& [name, report] : reports) {
        for (std::size_t c = 0; c < report.per_cycle.size(); ++c) {
            const auto& m = report.per_cycle[c];
            std::snprintf(buf, sizeof buf, "%s,%zu,%.12g,%.12g,%.12g,%lld,%lld,%lld,%lld\n",
                          name.c_str(), c, m.precision, m.recall, m.f1, m.tp, m.fp, m.fn,
                          m.tn);
            out += buf;
        }
        std::snprintf(buf, sizeof buf, "%s,mean,%.12g,%.12g,%.12g,,,,\n", name.c_str(),
                      report.precision.mean, report.recall.mean, report.f1.mean);
        out += buf;
        std::snprintf(buf, sizeof buf, "%s,std,%.12g,%.12g,%.12g,,,,\n", name.c_str(),
                      report.precision.std, report.recall.std, report.f1.std);
        out += buf;
    }
    return out;
}

std::string eval_reports_to_json(std::span<const NamedReport> reports,
                                 const std::string& config_echo) {
    nlohmann::json doc;
    doc["config"] = config_echo;
    auto& rows = doc["classifiers"];
    rows = nlohmann::json::array();
    for (const auto& [name, report] : reports) {
        nlohmann::json row;
        row["name"] = name;
        row["cycles"] = report.per_cycle.size();
        row["precision"] = {{"mean", report.precision.mean}, {"std", report.precision.std}};
        row["recall"] = {{"mean", report.recall.mean}, {"std", report.recall.std}};
        row["f1"] = {{"mean", report.f1.mean}, {"std", report.f1.std}};
        auto& cycles = row["per_cycle"];
        cycles = nlohmann::json::array();
        for (std::size_t c = 0; c < report.per_cycle.size(); ++c) {
            const auto& m = report.per_cycle[c];
            cycles.push_back({{"cycle", c},
                              {"precision", m.precision},
                              {"recall", m.recall},
                              {"f1", m.f1},
                              {"tp", m.tp},
                              {"fp", m.fp},
                              {"fn", m.fn},
                              {"tn", m.tn}});
        }
        rows.push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

std::string eval_summary_table(std::span<const NamedReport> reports) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-14s %-14s %-14s\n", "classifier",
                  "precision", "recall", "f1");
    out += buf;
    for (const auto& [name, report] : reports) {
        std::snprintf(buf, sizeof buf, "%-12s %5.1f \xc2\xb1 %-5.1f  %5.1f \xc2\xb1 %-5.1f  %5.1f \xc2\xb1 %-5.1f\n",
                      name.c_str(), 100.0 * report.precision.mean,
                      100.0 * report.precision.std, 100.0 * report.recall.mean,
                      100.0 * report.recall.std, 100.0 * report.f1.mean,
                      100.0 * report.f1.std);
        out += buf;
    }
    return out;
}

std::string html_report(std::span<const RecordingResults> recordings) {
    nlohmann::json payload = nlohmann::json::array();
    for (const auto& rr : recordings) {
        const auto& rec = *rr.recording;
        // Min/max envelope, at most 4000 points per recording.
        const std::size_t target = 2000;
        const std::size_t bucket = std::max<std::size_t>(1, rec.samples.size() / target);
        nlohmann::json wave = nlohmann::json::array();
        for (std::size_t i = 0; i < rec.samples.size(); i += bucket) {
            double lo = rec.samples[i], hi = rec.samples[i];
            for (std::size_t j = i; j < std::min(i + bucket, rec.samples.size()); ++j) {
                lo = std::min(lo, rec.samples[j]);
                hi = std::max(hi, rec.samples[j]);
            }
            wave.push_back(std::round(lo * 1000.0) / 1000.0);
            wave.push_back(std::round(hi * 1000.0) / 1000.0);
        }
        nlohmann::json events = nlohmann::json::array();
        for (const auto& r : rr.results) {
            if (r.label == Label::crackle) {
                events.push_back({{"start", r.start_time},
                                  {"end", r.end_time},
                                  {"confidence", std::round(r.confidence * 1000.0) / 1000.0}});
            }
        }
        payload.push_back({{"id", rec.source_id},
                           {"duration", rec.duration_seconds()},
                           {"wave", std::move(wave)},
                           {"crackles", std::move(events)}});
    }

    std::string html;
    html += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
    html += "<title>crackle report</title>\n<style>\n";
    html += "body{font-family:sans-serif;margin:1.5em;background:#fafafa;color:#222}\n";
    html += "h2{margin:0.8em 0 0.2em}\n";
    html += ".meta{color:#666;font-size:0.85em;margin-bottom:0.4em}\n";
    html += "canvas{border:1px solid #ccc;background:#fff;width:100%;height:160px}\n";
    html += "</style>\n</head>\n<body>\n<h1>Crackle classification report</h1>\n";
    html += "<div id=\"charts\"></div>\n<script>\nconst data = ";
    html += payload.dump();
    html += ";\nconst root = document.getElementById('charts');\n";
    html += R"JS(for (const rec of data) {
  const h2 = document.createElement('h2');
  h2.textContent = rec.id;
  const meta = document.createElement('div');
  meta.className = 'meta';
  meta.textContent = rec.crackles.length + ' crackle window(s), ' +
      rec.duration.toFixed(2) + ' s';
  const canvas = document.createElement('canvas');
  canvas.width = 1200; canvas.height = 160;
  root.appendChild(h2); root.appendChild(meta); root.appendChild(canvas);
  const ctx = canvas.getContext('2d');
  const W = canvas.width, H = canvas.height, mid = H / 2;
  ctx.fillStyle = 'rgba(220,60,60,0.25)';
  for (const ev of rec.crackles) {
    const x0 = ev.start / rec.duration * W;
    const x1 = ev.end / rec.duration * W;
    ctx.fillRect(x0, 0, Math.max(1, x1 - x0), H);
  }
  ctx.strokeStyle = '#2060a0'; ctx.beginPath();
  const n = rec.wave.length / 2;
  for (let i = 0; i < n; i++) {
    const x = i / n * W;
    ctx.moveTo(x, mid - rec.wave[2 * i + 1] * mid * 0.95);
    ctx.lineTo(x, mid - rec.wave[2 * i] * mid * 0.95);
  }
  ctx.stroke();
  ctx.fillStyle = '#a02020'; ctx.font = '11px sans-serif';
  for (const ev of rec.crackles) {
    const x0 = ev.start / rec.duration * W;
    ctx.fillText(ev.confidence.toFixed(2), x0 + 2, 12);
  }
}
)JS";
    html += "</script>\n</body>\n</html>\n";
    return html;
}

}  // namespace crackle
