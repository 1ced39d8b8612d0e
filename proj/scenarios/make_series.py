"""Regenerates the synthetic series used by the bundled scenarios."""
import math

def write(name, header, rows):
    with open(name, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(f"{v:.6g}" for v in r) + "\n")

def hour_of(k, m):
    return 24.0 * k / m

def t_out(h):
    return 26.0 + 6.0 * math.sin(2.0 * math.pi * (h - 9.0) / 24.0)

def solar(h):
    return 700.0 * math.sin(math.pi * (h - 6.0) / 14.0) if 6.0 < h < 20.0 else 0.0

def occupied(h):
    return 8.0 <= h < 18.0

def price(h):
    # synthetic two-peak tariff per MJ
    return 0.02 + 0.025 * math.exp(-((h - 11.0) / 2.5) ** 2) + 0.03 * math.exp(-((h - 18.5) / 2.0) ** 2)

M = 144
knots = [hour_of(k, M) for k in range(M + 1)]
write("day_weather_144.csv", ["hour", "T_out", "T_gnd", "Q_S", "Q_L"],
      [[h, t_out(h), 15.0, solar(h), 360.0 + 2.0 * (t_out(h) - 26.0)] for h in knots])
write("occupancy_1z.csv", ["hour", "office"], [[h, 25.0 if occupied(h) else 0.0] for h in knots])
write("occupancy_3z.csv", ["hour", "floor0", "floor1", "floor2"],
      [[h] + ([20.0, 30.0, 25.0] if occupied(h) else [0.0] * 3) for h in knots])

def band(h):
    return (21.0, 24.0) if 7.0 <= h <= 18.0 else (18.0, 28.0)

write("comfort_1z.csv", ["hour", "lo_office", "hi_office"], [[h, *band(h)] for h in knots])
write("comfort_3z.csv", ["hour", "lo_floor0", "hi_floor0", "lo_floor1", "hi_floor1", "lo_floor2", "hi_floor2"],
      [[h, *band(h), *band(h), *band(h)] for h in knots])
write("price_144.csv", ["hour", "price"], [[hour_of(k, M), price(hour_of(k, M) + 12.0 / M)] for k in range(M)])

def micro(h):
    ec = 120.0 + 330.0 * math.exp(-((h - 14.0) / 4.0) ** 2)
    eh = 150.0 + 250.0 * math.exp(-((h - 7.0) / 2.0) ** 2) + 200.0 * math.exp(-((h - 19.0) / 2.5) ** 2)
    el = 400.0 + 300.0 * math.exp(-((h - 12.0) / 4.0) ** 2)
    return [h, ec, eh, el, 1.5 * price(h) / 3.0, 1.0]

hdr = ["hour", "E_c", "E_h", "E_l", "price", "fuel_price"]
write("microgrid_24.csv", hdr, [micro(h + 0.5) for h in range(24)])
write("microgrid_4.csv", hdr, [micro(h + 0.5) for h in (6, 7, 13, 19)])
