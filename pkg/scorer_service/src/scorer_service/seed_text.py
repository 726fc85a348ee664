"""Seed text for the lite language-identification profiles.

A few paragraphs of ordinary prose per language, written for this package.
The character n-gram profiles built from them separate the four supported
languages; they are not a corpus of anything.
"""

SEED_TEXT = {
    "en": (
        "The weather was fine this morning and the children walked to school together. "
        "She said that they would have finished the work before the end of the week. "
        "There are many things we should think about before we decide what to do next. "
        "He could not remember where he had left the keys, so he looked everywhere. "
        "It is often difficult to know whether something is right until you have tried it. "
        "People who live in the city usually take the train to work every day. "
        "I would like to thank you for your help with all of these questions. "
        "They were watching the birds through the window while the coffee was getting cold. "
        "Nothing ever happens here on Sundays, which is exactly why we like it. "
        "Could you please tell me how to get to the station from this street?"
    ),
    "de": (
        "Das Wetter war heute Morgen schön und die Kinder gingen zusammen zur Schule. "
        "Sie sagte, dass sie die Arbeit vor dem Ende der Woche beendet haben würden. "
        "Es gibt viele Dinge, über die wir nachdenken sollten, bevor wir etwas entscheiden. "
        "Er konnte sich nicht erinnern, wo er die Schlüssel gelassen hatte, und suchte überall. "
        "Es ist oft schwierig zu wissen, ob etwas richtig ist, bevor man es versucht hat. "
        "Die Leute, die in der Stadt wohnen, fahren gewöhnlich mit dem Zug zur Arbeit. "
        "Ich möchte mich bei Ihnen für Ihre Hilfe mit diesen Fragen herzlich bedanken. "
        "Sie schauten durch das Fenster den Vögeln zu, während der Kaffee kalt wurde. "
        "Hier passiert sonntags nie etwas, und genau deshalb gefällt es uns so gut. "
        "Können Sie mir bitte sagen, wie ich von dieser Straße zum Bahnhof komme?"
    ),
    "it": (
        "Il tempo era bello questa mattina e i bambini sono andati a scuola insieme. "
        "Ha detto che avrebbero finito il lavoro prima della fine della settimana. "
        "Ci sono molte cose a cui dovremmo pensare prima di decidere cosa fare. "
        "Non riusciva a ricordare dove avesse lasciato le chiavi e ha cercato dappertutto. "
        "Spesso è difficile sapere se una cosa è giusta finché non l'hai provata. "
        "Le persone che vivono in città di solito prendono il treno per andare al lavoro. "
        "Vorrei ringraziarvi per il vostro aiuto con tutte queste domande. "
        "Guardavano gli uccelli dalla finestra mentre il caffè si raffreddava. "
        "Qui non succede mai niente la domenica, ed è proprio per questo che ci piace. "
        "Potrebbe dirmi per favore come arrivare alla stazione da questa strada?"
    ),
    "sv": (
        "Vädret var fint i morse och barnen gick till skolan tillsammans. "
        "Hon sa att de skulle ha avslutat arbetet före slutet av veckan. "
        "Det finns många saker vi borde tänka på innan vi bestämmer vad vi ska göra. "
        "Han kunde inte minnas var han hade lämnat nycklarna, så han letade överallt. "
        "Det är ofta svårt att veta om något är rätt innan man har försökt. "
        "Människor som bor i staden tar vanligtvis tåget till jobbet varje dag. "
        "Jag skulle vilja tacka er för hjälpen med alla dessa frågor. "
        "De tittade på fåglarna genom fönstret medan kaffet blev kallt. "
        "Det händer aldrig något här på söndagar, och det är precis därför vi trivs. "
        "Kan du berätta för mig hur jag kommer till stationen från den här gatan?"
    ),
}
